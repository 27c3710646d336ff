/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulation_free: (a: number, b: number) => void;
export const responseCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const simulation_advance: (a: number, b: number) => [number, number];
export const simulation_extinctionGuaranteed: (a: number) => number;
export const simulation_history: (a: number) => [number, number];
export const simulation_n: (a: number) => [number, number];
export const simulation_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const simulation_nodes: (a: number) => [number, number];
export const simulation_p: (a: number) => [number, number];
export const simulation_param: (a: number, b: number, c: number) => [number, number];
export const simulation_reset: (a: number) => void;
export const simulation_setDt: (a: number, b: number) => [number, number];
export const simulation_setParam: (a: number, b: number, c: number, d: number) => [number, number];
export const simulation_t: (a: number) => number;
export const simulation_z: (a: number) => number;
export const translationLambda: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
