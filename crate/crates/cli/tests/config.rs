use fowler_core::nonlocal::{Boundary, ConvolutionMethod, DiscretizationKind, TruncationPolicy};
use fowler_core::schemes::FluxKind;
use fowler_lab::config::{convergence_config, truncation_config, RawConfig, RunConfig};
use fowler_lab::{init_threads, CliError};

const BASE: &str = "\
model.v = 1
model.epsilon = 0.5   # trailing comment
model.eta = 8

grid.dx = 0.05
grid.dt = 0.001
grid.n_cells = 80
grid.t_final = 0.05
";

#[test]
fn defaults_fill_optional_keys() {
    let c = RunConfig::from_text(BASE, None).unwrap();
    let s = &c.scheme;
    assert_eq!(s.kind, DiscretizationKind::I1);
    assert_eq!(s.flux, FluxKind::LinearUpwind);
    assert_eq!(s.boundary, Boundary::Causal);
    assert_eq!(s.method, ConvolutionMethod::Auto);
    assert!(c.default_truncation);
    assert_eq!(s.truncation, TruncationPolicy::Memory(4.0));
    assert_eq!(s.params.eta, 8.0);
    assert_eq!(s.grid.n_steps(), 50);
    assert_eq!(c.snapshot_every, 0);
}

#[test]
fn explicit_keys_are_honoured() {
    let text = format!(
        "{BASE}scheme.kind = I3\nscheme.flux = engquist-osher\nscheme.terms = 12\nscheme.boundary = periodic\nscheme.method = fft\n"
    );
    let c = RunConfig::from_text(&text, Some(DiscretizationKind::I2)).unwrap();
    assert_eq!(c.scheme.kind, DiscretizationKind::I2);
    assert_eq!(c.scheme.flux, FluxKind::BurgersUpwind);
    assert_eq!(c.scheme.truncation, TruncationPolicy::Terms(12));
    assert_eq!(c.scheme.boundary, Boundary::Periodic);
    assert_eq!(c.scheme.method, ConvolutionMethod::Fft);
    assert!(!c.default_truncation);
}

fn config_error(text: &str) -> (usize, String, String) {
    match RunConfig::from_text(text, None) {
        Err(CliError::Config { line, key, message }) => (line, key, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn errors_carry_line_and_key() {
    let (line, key, _) = config_error(&format!("{BASE}scheme.memory = 1\nscheme.terms = 3\n"));
    assert_eq!((line, key.as_str()), (10, "scheme.terms"));
    let (line, key, _) =
        config_error(&BASE.replace("grid.n_cells = 80", "grid.domain_length = 4.01"));
    assert_eq!((line, key.as_str()), (7, "grid.domain_length"));
    let (line, key, _) = config_error(&format!("{BASE}scheme.memory = -2\n"));
    assert_eq!((line, key.as_str()), (9, "scheme.memory"));
    let (line, key, _) = config_error("model.v 1\n");
    assert_eq!((line, key.as_str()), (1, "model.v 1"));
    let (line, key, m) = config_error(&format!("{BASE}analyze.theta0 = 4\n"));
    assert_eq!((line, key.as_str()), (9, "analyze.theta0"));
    assert!(m.contains("[0, pi)"));
}

#[test]
fn raw_config_rejects_duplicates() {
    let e = RawConfig::parse("grid.dx = 1\ngrid.dx = 2\n").unwrap_err();
    assert_eq!(
        e.to_string(),
        "config line 2: `grid.dx`: duplicate key (first set on line 1)"
    );
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn study_configs_start_from_defaults() {
    let c = convergence_config(
        "converge.df = 0.4\nmodel.eta = 0.5\n",
        Some(DiscretizationKind::I2),
    )
    .unwrap();
    assert_eq!(c.kind, DiscretizationKind::I2);
    assert_eq!(c.params.eta, 0.5);
    assert_eq!(c.dx_values.len(), 4);
    assert!(convergence_config("converge.dx_values = 0.1, 0.2, 0.05\n", None).is_err());
    assert!(convergence_config("converge.dx_values = 0.1, 0.03, 0.01\n", None).is_err());
    let t = truncation_config("truncation.sweep_memories = 8, 4\n", None).unwrap();
    assert_eq!(t.sweep_memories, vec![8.0, 4.0]);
    assert_eq!(t.config.dx_values.len(), 5);
    assert!(truncation_config("truncation.dx_values = 0.1\n", None).is_err());
}

#[test]
fn exit_codes_follow_error_class() {
    let numerical: CliError = fowler_core::Error::BlowUp { step: 3, time: 0.1 }.into();
    assert_eq!(numerical.exit_code(), 2);
    let invalid: CliError = fowler_core::Error::EmptyTruncation.into();
    assert_eq!(invalid.exit_code(), 1);
    assert!(init_threads(Some("0")).is_err());
    assert!(init_threads(Some("two")).is_err());
    assert!(init_threads(None).is_ok());
}
