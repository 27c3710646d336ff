/* tslint:disable */
/* eslint-disable */

export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    constructor(light: string, response: string, nodes: number);
    param(name: string): number | undefined;
    reset(): void;
    setDt(dt: number): void;
    setParam(name: string, value: number): void;
    readonly extinctionGuaranteed: boolean;
    /**
     * Flattened `[t, ∫p, z]` triples.
     */
    readonly history: Float64Array;
    readonly n: Float64Array;
    readonly nodes: Float64Array;
    readonly p: Float64Array;
    readonly t: number;
    readonly z: number;
}

export function responseCurve(response: string, upper: number, samples: number): Float64Array;

export function translationLambda(response: string, upper: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly responseCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number];
    readonly simulation_extinctionGuaranteed: (a: number) => number;
    readonly simulation_history: (a: number) => [number, number];
    readonly simulation_n: (a: number) => [number, number];
    readonly simulation_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly simulation_nodes: (a: number) => [number, number];
    readonly simulation_p: (a: number) => [number, number];
    readonly simulation_param: (a: number, b: number, c: number) => [number, number];
    readonly simulation_reset: (a: number) => void;
    readonly simulation_setDt: (a: number, b: number) => [number, number];
    readonly simulation_setParam: (a: number, b: number, c: number, d: number) => [number, number];
    readonly simulation_t: (a: number) => number;
    readonly simulation_z: (a: number) => number;
    readonly translationLambda: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
