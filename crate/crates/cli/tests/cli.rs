use std::path::PathBuf;
use std::process::Command as Process;

use shiftspace_cli::{parse_args, run, Command, GenSpec, Sweep, SweepParam};

fn args(s: &str) -> Vec<String> {
    std::iter::once("shiftspace".to_owned())
        .chain(s.split_whitespace().map(str::to_owned))
        .collect()
}

fn render(s: &str) -> String {
    let cfg = parse_args(args(s)).unwrap();
    let mut out = Vec::new();
    run(&cfg, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn parses_generator_specs() {
    assert_eq!(
        GenSpec::parse("bspline:m=3,sigma=2").unwrap(),
        GenSpec::Bspline { degree: 3, sigma: Some(2.0) }
    );
    assert_eq!(GenSpec::parse("sinc").unwrap(), GenSpec::Sinc { sigma: None });
    assert_eq!(
        GenSpec::parse("gauss:width=2").unwrap(),
        GenSpec::Gauss { width: 2.0, center: 0.0, freq: 0.0 }
    );
    assert_eq!(
        GenSpec::parse("file:data/f.csv").unwrap(),
        GenSpec::File(PathBuf::from("data/f.csv"))
    );
    assert!(GenSpec::parse("bspline:m=x").is_err());
    assert!(GenSpec::parse("wavelet").is_err());
}

#[test]
fn parses_sweeps() {
    let s = Sweep::parse("rho=0.25,0.5,1").unwrap();
    assert_eq!(s.param, SweepParam::Rho);
    assert_eq!(s.values, vec![0.25, 0.5, 1.0]);
    assert!(Sweep::parse("rho").is_err());
    assert!(Sweep::parse("tau=1").is_err());
}

#[test]
fn config_defaults_and_sigma_from_generator() {
    let cfg = parse_args(args("dfun --gen bspline:m=1,sigma=2")).unwrap();
    assert_eq!(cfg.command, Command::Dfun);
    assert_eq!(cfg.sigma, 2.0);
    assert_eq!(cfg.tol, 1e-8);
    assert_eq!(cfg.dgrid, 4097);
    assert_eq!(cfg.jrange, 64);
    assert!(cfg.rho.is_none());
}

#[test]
fn rejects_bad_invocations() {
    assert!(parse_args(args("")).is_err());
    assert!(parse_args(args("project --gen sinc")).is_err());
    assert!(parse_args(args("besterr --gen sinc --sigma 1 --rho 2 --f gauss:width=1")).is_err());
    assert!(parse_args(args("dfun --gen sinc --unknown")).is_err());
}

#[test]
fn dfun_of_box_spline_is_one() {
    let text = render("dfun --gen bspline:m=0,sigma=1 --dgrid 33");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,D"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 33);
    for row in rows {
        let d: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}

#[test]
fn riesz_reports_bounds() {
    let text = render("riesz --gen sinc:sigma=1");
    assert!(text.contains("class=riesz"), "{text}");
}

#[test]
fn besterr_sweep_has_one_row_per_value() {
    let text = render("besterr --gen bspline:m=1,sigma=1 --f gauss:width=1 --sweep rho=0.25,0.5,1");
    let rows: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("shiftspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("d.csv");
    let cmd = "dfun --gen bspline:m=2,sigma=1 --dgrid 17";
    let status = Process::new(env!("CARGO_BIN_EXE_shiftspace"))
        .args(args(cmd).into_iter().skip(1))
        .arg("--out")
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), render(cmd));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn projection_round_trips_through_a_file() {
    let dir = std::env::temp_dir().join(format!("shiftspace-file-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.csv");
    let mut text = String::from("x,re,im\n");
    for k in 0..=2000 {
        let x = -10.0 + 0.01 * k as f64;
        text.push_str(&format!("{x},{},0\n", (-x * x / 2.0).exp()));
    }
    std::fs::write(&path, text).unwrap();
    let from_file = render(&format!(
        "besterr --gen bspline:m=1,sigma=1 --f file:{}",
        path.display()
    ));
    let analytic = render("besterr --gen bspline:m=1,sigma=1 --f gauss:width=1");
    let value = |t: &str| -> f64 { t.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap() };
    assert!((value(&from_file) - value(&analytic)).abs() < 1e-6 * value(&analytic).max(1e-3));
    std::fs::remove_dir_all(&dir).ok();
}
