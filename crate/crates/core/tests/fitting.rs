mod common;

use statrs::distribution::{ContinuousCDF, StudentsT};

use common::{ols_limit, power_law_span, stretched_mass, student_mass};
use microret::diststats::{empirical_pdf, tail_ccdf, Binning, Sign};
use microret::fitting::{
    fit_student, fit_tail, hill_from_sample, ScalingRange, StretchedExpParams, StudentFitOptions,
    StudentParams,
};
use microret::synth::{sample, GeneratorSpec, ReturnModel};

fn draws(model: ReturnModel, seed: u64, n: usize) -> Vec<f64> {
    sample(&GeneratorSpec { model, seed, n }).unwrap()
}

fn student(alpha: f64, m: f64, scale: f64) -> StudentParams {
    StudentParams::new(alpha, m, scale).unwrap()
}

#[test]
fn student_density_integrates_to_one() {
    for p in [
        student(1.0, 0.0, 1.0),
        student(2.5, 0.0, 1.0),
        student(3.1, 0.0, 1.9),
        student(3.0, 0.5, 2.0),
        student(4.5, -1.0, 0.3),
        student(10.0, 0.0, 5.0),
    ] {
        let mass = student_mass(&p);
        assert!((mass - 1.0).abs() < 1e-8, "{p:?}: {mass}");
    }
}

#[test]
fn stretched_exponential_integrates_to_one() {
    for c in [0.3, 1.0, 2.0] {
        let p = StretchedExpParams::new(c, 1.7).unwrap();
        let mass = stretched_mass(&p);
        assert!((mass - 1.0).abs() < 1e-8, "c={c}: {mass}");
    }
}

#[test]
fn student_fit_recovers_parameters() {
    let v = draws(ReturnModel::Student(student(3.1, 0.0, 1.9)), 101, 1_000_000);
    let fit = fit_student(
        &empirical_pdf(&v, &Binning::default()).unwrap(),
        &StudentFitOptions::default(),
    )
    .unwrap();
    assert!(fit.converged);
    assert!((fit.params.alpha - 3.1).abs() < 0.15, "{:?}", fit.params);
    assert!((fit.params.scale - 1.9).abs() < 0.15, "{:?}", fit.params);
    assert!(fit.alpha_stderr.unwrap() > 0.0);
}

#[test]
fn tail_fit_matches_large_sample_limit() {
    // The per-point regression on [2.4, 60.3] converges to the slope of the
    // exact CCDF sampled at ideal order statistics, not to α itself.
    let p = student(3.1, 0.0, 1.9);
    let t = StudentsT::new(0.0, 1.0 / p.scale.sqrt(), p.alpha).unwrap();
    let v = draws(ReturnModel::Student(p), 7, 1_000_000);
    let range = ScalingRange::bounded(2.4, 60.3).unwrap();
    for sign in [Sign::Positive, Sign::Negative] {
        let ccdf = tail_ccdf(&v, sign).unwrap();
        let fit = fit_tail(&ccdf, &range).unwrap();
        let limit = ols_limit(|q| t.inverse_cdf(1.0 - q / 2.0), ccdf.n, 2.4, 60.3);
        assert!(
            (fit.exponent - limit).abs() < 0.05,
            "{sign:?}: {} vs {limit}",
            fit.exponent
        );
        assert!((limit - 2.89).abs() < 0.03, "{limit}");
        assert!(fit.r_squared > 0.99);
    }
}

#[test]
fn pareto_tail_slope() {
    let v = draws(
        ReturnModel::Pareto {
            alpha: 3.0,
            x_min: 1.0,
        },
        8,
        1_000_000,
    );
    let fit = fit_tail(
        &tail_ccdf(&v, Sign::Positive).unwrap(),
        &ScalingRange::to_max(1.0).unwrap(),
    )
    .unwrap();
    assert!((fit.exponent - 3.0).abs() < 0.05, "{}", fit.exponent);
    let hill = hill_from_sample(&v, Sign::Positive, 10_000).unwrap();
    assert!((hill.exponent - 3.0).abs() < 3.0 * hill.stderr, "{hill:?}");
}

#[test]
fn gaussian_has_no_power_law_tail() {
    let g = draws(
        ReturnModel::Gaussian {
            mean: 0.0,
            stdev: 1.0,
        },
        9,
        1_000_000,
    );
    let s = draws(ReturnModel::Student(student(3.0, 0.0, 3.0)), 9, 1_000_000);
    let range = ScalingRange::to_max(2.4).unwrap();
    let gf = fit_tail(&tail_ccdf(&g, Sign::Positive).unwrap(), &range).unwrap();
    let sf = fit_tail(&tail_ccdf(&s, Sign::Positive).unwrap(), &range).unwrap();
    assert!(
        gf.r_squared < 0.99 && sf.r_squared > 0.99,
        "{} {}",
        gf.r_squared,
        sf.r_squared
    );
    // the apparent exponent keeps growing as the range moves out
    let further = fit_tail(
        &tail_ccdf(&g, Sign::Positive).unwrap(),
        &ScalingRange::to_max(3.0).unwrap(),
    )
    .unwrap();
    assert!(
        further.exponent > gf.exponent + 1.0,
        "{} {}",
        gf.exponent,
        further.exponent
    );

    let fit = fit_student(
        &empirical_pdf(&g, &Binning::default()).unwrap(),
        &StudentFitOptions::default(),
    )
    .unwrap();
    assert!(fit.params.alpha > 10.0, "{:?}", fit.params);
}

#[test]
fn stretched_exponential_approaches_power_law() {
    let r = 1.0e3;
    let p = StretchedExpParams::power_law_calibrated(0.05, 1.0, r).unwrap();
    let span = power_law_span(&p, r, -2.0, 0.1);
    assert!(span >= 1.0, "{span}");
    // far from the power-law regime the same window is short
    let sharp = StretchedExpParams::power_law_calibrated(1.0, 1.0, r).unwrap();
    assert!(power_law_span(&sharp, r, -2.0, 0.1) < 0.1);
}
