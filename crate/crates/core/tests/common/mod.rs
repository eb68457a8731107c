#![allow(dead_code)]

use chrono::NaiveDate;
use microret::fitting::{stretched_exp_pdf, student_pdf, StretchedExpParams, StudentParams};
use microret::synth::{ArrivalProcess, ReturnModel, SyntheticStreamSpec};
use microret::tickdata::{Price, SessionCalendar};

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre rule on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            panel += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * panel;
    }
    total
}

/// ∫ f(g) dg over the real line with g = m + tan θ / √L.
pub fn student_mass(p: &StudentParams) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    integrate(
        |theta: f64| {
            let c = theta.cos();
            student_pdf(p.m + theta.tan() / p.scale.sqrt(), p) / (c * c * p.scale.sqrt())
        },
        -half_pi,
        half_pi,
        20_000,
    )
}

/// ∫ f(r) dr over r > 0 with r = r0·e^s.
pub fn stretched_mass(p: &StretchedExpParams) -> f64 {
    integrate(
        |s: f64| {
            let r = p.r0 * s.exp();
            stretched_exp_pdf(r, p).unwrap() * r
        },
        -40.0 / p.c,
        5.0 / p.c,
        20_000,
    )
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn student_stream(
    id: &str,
    rate: f64,
    days: (NaiveDate, NaiveDate),
    seed: u64,
) -> SyntheticStreamSpec {
    SyntheticStreamSpec {
        instrument_id: id.to_owned(),
        start_date: days.0,
        end_date: days.1,
        trades_per_minute: rate,
        arrival: ArrivalProcess::Poisson,
        return_model: ReturnModel::Student(StudentParams::new(3.0, 0.0, 1e5).unwrap()),
        initial_price: Price::from_millis(100_000),
        seed,
        calendar: SessionCalendar::default(),
    }
}

/// Large-sample limit of the per-point log-log CCDF regression for a
/// distribution with survival quantile function `q(p)`: the sample is
/// replaced by its ideal order statistics `q(i/n)`.
pub fn ols_limit(q: impl Fn(f64) -> f64, n: usize, lo: f64, hi: f64) -> f64 {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 1..n {
        let x = q(i as f64 / n as f64);
        if x < lo {
            break;
        }
        if x <= hi {
            xs.push(x.ln());
            ys.push((i as f64 / n as f64).ln());
        }
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

/// Longest stretch, in decades, of a log grid around `r` where the local
/// log-log slope of the density stays within `tol` of `target`.
pub fn power_law_span(p: &StretchedExpParams, r: f64, target: f64, tol: f64) -> f64 {
    let per_decade = 200;
    let h = 1e-4;
    let (mut best, mut run) = (0usize, 0usize);
    for k in -4 * per_decade..=4 * per_decade {
        let x = r * 10f64.powf(k as f64 / per_decade as f64);
        let slope = (stretched_exp_pdf(x * (1.0 + h), p).unwrap().ln()
            - stretched_exp_pdf(x * (1.0 - h), p).unwrap().ln())
            / ((1.0 + h).ln() - (1.0 - h).ln());
        if (slope - target).abs() < tol {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best.saturating_sub(1) as f64 / per_decade as f64
}
