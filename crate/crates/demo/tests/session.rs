use plankton_demo::session::{response_curve, translation_lambda, Session, PARAM_NAMES};

#[test]
fn fresh_session_has_one_history_point() {
    let s = Session::new("exponential", "holling2", 41).unwrap();
    assert_eq!(s.history().len(), 1);
    assert_eq!(s.nodes().len(), 41);
    assert_eq!(s.state().z, 0.1);
    assert!(s.state().n.iter().all(|&v| v == 1.0));
}

#[test]
fn advance_extends_history_and_time() {
    let mut s = Session::new("self-shading", "ivlev", 31).unwrap();
    s.advance(250).unwrap();
    assert_eq!(s.history().len(), 251);
    assert!((s.state().t - 0.25).abs() < 1e-12);
    assert!(s.state().p.iter().all(|&v| v >= 0.0));
    let ts: Vec<f64> = s.history().iter().map(|h| h[0]).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn set_param_validates_and_restarts() {
    let mut s = Session::new("exponential", "holling3", 21).unwrap();
    s.advance(10).unwrap();
    s.set_param("m_p", 0.8).unwrap();
    assert_eq!(s.param("m_p"), Some(0.8));
    assert_eq!(s.state().t, 0.0);
    assert_eq!(s.history().len(), 1);
    let err = s.set_param("chi", 0.0).unwrap_err();
    assert!(err.contains("chi"), "{err}");
    assert_eq!(s.param("chi"), Some(1.0));
    assert!(s.set_param("bogus", 1.0).is_err());
    for name in PARAM_NAMES {
        assert!(s.param(name).is_some(), "{name}");
    }
}

#[test]
fn extinction_flag_follows_mortality() {
    let mut s = Session::new("exponential", "holling2", 21).unwrap();
    s.set_param("r", 0.5).unwrap();
    s.set_param("m_p", 1.0).unwrap();
    assert!(s.extinction_guaranteed());
    s.set_param("m_p", 0.2).unwrap();
    assert!(!s.extinction_guaranteed());
}

#[test]
fn depth_change_rescales_grid() {
    let mut s = Session::new("exponential", "holling1", 11).unwrap();
    s.set_param("H", 5.0).unwrap();
    assert_eq!(*s.nodes().last().unwrap(), 5.0);
}

#[test]
fn unknown_tags_rejected() {
    assert!(Session::new("sunny", "holling2", 21).is_err());
    assert!(Session::new("exponential", "holling9", 21).is_err());
    assert!(Session::new("exponential", "holling2", 2).is_err());
    assert!(response_curve("holling2", 0.0, 10).is_err());
}

#[test]
fn curve_and_lambda() {
    let c = response_curve("holling2", 4.0, 5).unwrap();
    assert_eq!(c, vec![0.0, 0.5, 2.0 / 3.0, 0.75, 0.8]);
    assert_eq!(translation_lambda("holling1", 5.0).unwrap(), 1.0);
    assert!((translation_lambda("ratio-quad", 4.0).unwrap() - 0.8).abs() < 1e-12);
    assert!((translation_lambda("holling3", 20.0).unwrap() - 0.5).abs() < 1e-12);
}
