mod common;

use proptest::prelude::*;

use common::{date, student_stream};
use microret::returns::{
    clock_returns, event_returns, pool_ensemble, standardize, trading_frequency, ReturnSeries,
    TimescaleSpec,
};
use microret::synth::{generate_tick_stream, ArrivalProcess, ReturnModel};
use microret::tickdata::{
    build_midprice_series, MidpriceSeries, Price, SessionCalendar, TickEvent, TimeOfDay,
};

/// One instrument with prices `mids` (in thousandths) spread over the
/// sessions of consecutive days, `per_session` trades each.
fn series_from(mids: &[i64], per_session: usize) -> MidpriceSeries {
    let cal = SessionCalendar::default();
    let opens = [
        TimeOfDay::hms(9, 30, 0).centis(),
        TimeOfDay::hms(13, 0, 0).centis(),
    ];
    let events: Vec<TickEvent> = mids
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let block = i / per_session;
            let day = date(2003, 1, 6) + chrono::Days::new((block / 2) as u64);
            let t = opens[block % 2] + (i % per_session) as u32 * 100;
            TickEvent {
                instrument_id: "P".into(),
                trade_date: day,
                timestamp: TimeOfDay::from_centis(t).unwrap(),
                best_bid: Price::from_millis(m - 10),
                best_ask: Price::from_millis(m + 10),
            }
        })
        .collect();
    build_midprice_series(&events, &cal).unwrap()
}

/// Segment-aligned start offsets of lagged returns.
fn offsets(series: &MidpriceSeries, lag: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut at = 0;
    for g in series.segments() {
        let n = g.range.len().saturating_sub(lag);
        out.push((at, n));
        at += n;
    }
    out
}

proptest! {
    #[test]
    fn count_law(mids in prop::collection::vec(100i64..1_000_000, 1..400), per in 1usize..50, delta in 1u32..40) {
        let s = series_from(&mids, per);
        let r = event_returns(&s, delta).unwrap();
        let expected: usize = s.segments().iter().map(|g| g.range.len().saturating_sub(delta as usize)).sum();
        prop_assert_eq!(r.values.len(), expected);
    }

    #[test]
    fn aggregated_returns_are_sums(mids in prop::collection::vec(100i64..1_000_000, 2..400), per in 2usize..80, k in 1u32..10) {
        let s = series_from(&mids, per);
        let rk = event_returns(&s, k).unwrap().values;
        let r2k = event_returns(&s, 2 * k).unwrap().values;
        let lag = k as usize;
        for ((ak, nk), (a2, n2)) in offsets(&s, lag).into_iter().zip(offsets(&s, 2 * lag)) {
            prop_assert_eq!(n2, nk.saturating_sub(lag));
            for j in 0..n2 {
                let sum = rk[ak + j + lag] + rk[ak + j];
                prop_assert!((r2k[a2 + j] - sum).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn standardize_is_idempotent(values in prop::collection::vec(-1.0e3f64..1.0e3, 3..300)) {
        prop_assume!(values.iter().any(|v| (v - values[0]).abs() > 1e-6));
        let r = ReturnSeries { instrument_id: "X".into(), timescale: TimescaleSpec::event(1).unwrap(), values };
        let once = standardize(&r).unwrap();
        prop_assert!(once.values.iter().sum::<f64>().abs() / (once.values.len() as f64) < 1e-12);
        let twice = standardize(&ReturnSeries { values: once.values.clone(), ..r }).unwrap();
        prop_assert!((twice.stdev - 1.0).abs() < 1e-12);
        for (a, b) in once.values.iter().zip(&twice.values) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn pooled_count_is_sum_of_parts() {
    let days = (date(2003, 1, 6), date(2003, 1, 7));
    let mut parts = Vec::new();
    let mut total = 0;
    for i in 0..23 {
        let events = generate_tick_stream(&student_stream(
            &format!("S{i:02}"),
            1.0 + i as f64 * 0.5,
            days,
            i,
        ))
        .unwrap();
        let s = build_midprice_series(&events, &SessionCalendar::default()).unwrap();
        let z = standardize(&event_returns(&s, 1).unwrap()).unwrap();
        total += z.values.len();
        parts.push(z);
    }
    let pooled = pool_ensemble(&parts).unwrap();
    assert_eq!(pooled.len(), total);
    assert_eq!(pooled.per_instrument.len(), 23);
    assert!(pool_ensemble(&[]).is_err());
}

#[test]
fn trading_frequency_recovers_generator_rate() {
    let spec = student_stream("F", 5.0, (date(2003, 3, 3), date(2003, 3, 14)), 11);
    let events = generate_tick_stream(&spec).unwrap();
    let s = build_midprice_series(&events, &spec.calendar).unwrap();
    assert_eq!(s.trading_days(), 10);
    let f = trading_frequency(&s, &spec.calendar).unwrap();
    assert!((f - 5.0).abs() < 0.25, "{f}");
}

#[test]
fn constant_prices_give_zero_clock_returns() {
    let mut spec = student_stream("C", 3.0, (date(2003, 3, 3), date(2003, 3, 4)), 1);
    spec.return_model = ReturnModel::Constant { value: 0.0 };
    let events = generate_tick_stream(&spec).unwrap();
    let s = build_midprice_series(&events, &spec.calendar).unwrap();
    for d in 1..=5 {
        let r = clock_returns(&s, d, &spec.calendar).unwrap();
        assert!(!r.values.is_empty());
        assert!(r.values.iter().all(|&v| v == 0.0));
    }
    assert!(standardize(&event_returns(&s, 1).unwrap()).is_err());
}

#[test]
fn one_trade_per_minute_aligns_clock_and_event_time() {
    let mut spec = student_stream("R", 1.0, (date(2003, 3, 3), date(2003, 3, 7)), 5);
    spec.arrival = ArrivalProcess::Regular;
    let events = generate_tick_stream(&spec).unwrap();
    let s = build_midprice_series(&events, &spec.calendar).unwrap();
    let clock = clock_returns(&s, 1, &spec.calendar).unwrap();
    let event = event_returns(&s, 1).unwrap();
    assert_eq!(clock.values.len(), event.values.len());
    assert_eq!(clock.values.len(), 5 * 2 * 119);
    for (c, e) in clock.values.iter().zip(&event.values) {
        assert!((c - e).abs() <= 1e-12);
    }
}
