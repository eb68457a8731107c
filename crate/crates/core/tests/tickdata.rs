use std::io::Cursor;

use chrono::NaiveDate;
use proptest::prelude::*;

use microret::tickdata::{
    build_midprice_series, midprice, parse_ticks, write_ticks, Midprice, Price, SessionCalendar,
    TickEvent, TimeOfDay,
};

fn session_time() -> impl Strategy<Value = TimeOfDay> {
    // 09:30-11:30 and 13:00-15:00, in centiseconds
    prop_oneof![3_420_000u32..4_140_000, 4_680_000u32..5_400_000]
        .prop_map(|c| TimeOfDay::from_centis(c).unwrap())
}

fn event() -> impl Strategy<Value = TickEvent> {
    (
        prop::sample::select(vec!["000001", "000002", "600036"]),
        0u32..30,
        session_time(),
        1i64..2_000_000,
        0i64..500,
    )
        .prop_map(|(id, day, ts, bid, spread)| TickEvent {
            instrument_id: id.to_owned(),
            trade_date: NaiveDate::from_ymd_opt(2003, 1, 1).unwrap()
                + chrono::Days::new(day.into()),
            timestamp: ts,
            best_bid: Price::from_millis(bid),
            best_ask: Price::from_millis(bid + spread),
        })
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(events in prop::collection::vec(event(), 0..200)) {
        let mut buf = Vec::new();
        write_ticks(&mut buf, &events).unwrap();
        let parsed = parse_ticks(Cursor::new(buf), &SessionCalendar::default()).unwrap();
        prop_assert_eq!(parsed.stats.records as usize, events.len());
        prop_assert_eq!(parsed.stats.accepted as usize, events.len());

        let mut expected = std::collections::BTreeMap::<String, Vec<TickEvent>>::new();
        for e in &events {
            expected.entry(e.instrument_id.clone()).or_default().push(e.clone());
        }
        for v in expected.values_mut() {
            v.sort_by_key(|e| (e.trade_date, e.timestamp));
        }
        prop_assert_eq!(parsed.by_instrument, expected);
    }

    #[test]
    fn midprice_is_exact_half_sum(bid in 1i64..10_000_000, spread in 0i64..10_000) {
        let e = TickEvent {
            instrument_id: "X".into(),
            trade_date: NaiveDate::from_ymd_opt(2003, 1, 2).unwrap(),
            timestamp: TimeOfDay::hms(10, 0, 0),
            best_bid: Price::from_millis(bid),
            best_ask: Price::from_millis(bid + spread),
        };
        let m = midprice(&e);
        prop_assert_eq!(m.doubled_millis(), 2 * bid + spread);
        prop_assert!(m.to_f64() >= e.best_bid.to_f64() && m.to_f64() <= e.best_ask.to_f64());
    }

    #[test]
    fn series_partitions_events(events in prop::collection::vec(event(), 1..200)) {
        let mut one: Vec<TickEvent> = events
            .into_iter()
            .map(|mut e| { e.instrument_id = "X".into(); e })
            .collect();
        one.sort_by_key(|e| (e.trade_date, e.timestamp));
        let cal = SessionCalendar::default();
        let s = build_midprice_series(&one, &cal).unwrap();
        prop_assert_eq!(s.len(), one.len());
        let covered: usize = s.segments().iter().map(|g| g.range.len()).sum();
        prop_assert_eq!(covered, one.len());
        for g in s.segments() {
            for p in s.segment_points(g) {
                prop_assert_eq!(p.trade_date, g.trade_date);
                prop_assert_eq!(cal.session_of(p.timestamp.centis()), Some(g.session));
            }
        }
    }
}

#[test]
fn rejected_and_dropped_records_are_counted() {
    let text = "\
# header
000001,20030102,3420000,9.98,10.00
000001,20030102,3420100,10.02,10.00
000001,20030102,3420200,0.00,10.00
000001,20030102,3300000,9.98,10.00
000001,20030102,4140000,9.98,10.00
000001,20030102,4680000,9.99,10.01
";
    let p = parse_ticks(Cursor::new(text), &SessionCalendar::default()).unwrap();
    assert_eq!(p.stats.records, 6);
    assert_eq!(p.stats.accepted, 2);
    assert_eq!(p.stats.crossed, 1);
    assert_eq!(p.stats.non_positive, 1);
    // 09:10 is before the open and 11:30 is the exclusive end of the morning
    assert_eq!(p.stats.out_of_session, 2);
    let events = &p.by_instrument["000001"];
    assert_eq!(
        Midprice::of(events[0].best_bid, events[0].best_ask).to_string(),
        "9.99"
    );
    assert_eq!(events[1].midprice().to_string(), "10.00");
}

#[test]
fn malformed_line_reports_its_number() {
    let text = "000001,20030102,3420000,9.98,10.00\n000001,2003-01-02,3420000,9.98,10.00\n";
    let err = parse_ticks(Cursor::new(text), &SessionCalendar::default()).unwrap_err();
    assert!(err.to_string().starts_with("line 2:"), "{err}");
}
