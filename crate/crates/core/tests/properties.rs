mod support;

use coupled_fp::conditions::{symmetric_value_coordinates, symmetric_value_product};
use coupled_fp::{
    check_banach_k, check_samet, check_start, check_symmetric_mk, d2, delta_from_k, parse_finite, product_leq, solve,
    LinearOperator, OrderedMetricSpace, PairPoint, RealLine, Relation, Scalar, SolveOptions, Termination,
};
use proptest::prelude::*;
use support::oracle;

fn pair() -> impl Strategy<Value = PairPoint<f64>> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| PairPoint::new(a, b))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn d2_is_a_metric_on_the_plane(y in pair(), v in pair(), w in pair()) {
        let line = RealLine::default();
        let yv = d2(&line, &y, &v).unwrap();
        prop_assert!(yv >= 0.0);
        prop_assert_eq!(yv, d2(&line, &v, &y).unwrap());
        prop_assert_eq!(d2(&line, &y, &y).unwrap(), 0.0);
        prop_assert!(yv <= d2(&line, &y, &w).unwrap() + d2(&line, &w, &v).unwrap() + 1e-12);
        prop_assert!(close(yv, 0.5 * ((y.first - v.first).abs() + (y.second - v.second).abs())));
    }

    #[test]
    fn product_order_is_a_partial_order(y in pair(), v in pair(), w in pair()) {
        let line = RealLine::default();
        let le = |a: &PairPoint<f64>, b: &PairPoint<f64>| product_leq(&line, a, b).unwrap().is_le();
        prop_assert!(le(&y, &y));
        if le(&y, &v) && le(&v, &y) {
            prop_assert_eq!(&y, &v);
        }
        if le(&y, &v) && le(&v, &w) {
            prop_assert!(le(&y, &w));
        }
        let expected = v.first <= y.first && y.second <= v.second;
        prop_assert_eq!(le(&v, &y), expected);
        let rel = product_leq(&line, &v, &y).unwrap();
        prop_assert_eq!(rel == Relation::Greater, !expected && le(&y, &v));
    }

    #[test]
    fn symmetric_value_routes_agree(y in pair(), v in pair(), a in 0.0..3.0f64, b in 0.0..3.0f64, c in 0.5..6.0f64) {
        let line = RealLine::default();
        let op = LinearOperator::new(a, b, c).unwrap();
        let direct = symmetric_value_coordinates(&line, &op, &y, &v).unwrap();
        let product = symmetric_value_product(&line, &op, &y, &v).unwrap();
        prop_assert!(close(direct, product));
    }

    /// On comparable pairs the linear operator's symmetric value is exactly
    /// `(a + b)/c · h`.
    #[test]
    fn linear_symmetric_value_is_proportional(y in pair(), v in pair(), a in 0.0..3.0f64, b in 0.0..3.0f64, c in 0.5..6.0f64) {
        let line = RealLine::default();
        prop_assume!(product_leq(&line, &v, &y).unwrap().is_le());
        let op = LinearOperator::new(a, b, c).unwrap();
        let h = d2(&line, &y, &v).unwrap();
        let value = symmetric_value_product(&line, &op, &y, &v).unwrap();
        prop_assert!((value - (a + b) / c * h).abs() <= 1e-12 * (1.0 + h));
    }

    /// Banach-k ⇒ Meir–Keeler with δ = (1/k − 1)ε ⇒ symmetric with the same δ.
    #[test]
    fn implication_chain_on_linear_contractions(a in 0.0..2.0f64, b in 0.0..2.0f64, extra in 0.1..4.0f64, seed in 0u64..1000) {
        let c = 2.0 * a.max(b) + extra;
        let op = LinearOperator::new(a, b, c).unwrap();
        let k = 2.0 * a.max(b) / c;
        let line = RealLine::default();
        let banach = check_banach_k(&line, &op, &k, 400, seed).unwrap();
        prop_assert!(banach.holds(), "{:?}", banach.witness);
        let delta = move |e: &f64| delta_from_k(&k, e).unwrap().or_cap(1e3 * e);
        let grid = [0.1, 1.0, 10.0];
        prop_assert!(check_samet(&line, &op, &grid, &delta, 400, seed).unwrap().holds());
        prop_assert!(check_symmetric_mk(&line, &op, &grid, &delta, 400, seed).unwrap().holds());
    }

    #[test]
    fn eta_is_non_increasing_from_admissible_starts(a in 0.0..2.0f64, b in 0.0..2.0f64, extra in 0.1..3.0f64, z in pair()) {
        let line = RealLine::default();
        let op = LinearOperator::new(a, b, a + b + extra).unwrap();
        prop_assume!(check_start(&line, &op, &z).unwrap().admissible);
        let trace = solve(&line, &op, &z, &SolveOptions::new(1e-10, 100_000)).unwrap();
        prop_assert_eq!(trace.termination, Termination::Converged);
        for w in trace.eta.windows(2) {
            prop_assert!(!f64::exceeds(&w[1], &w[0]), "eta rose: {} -> {}", w[0], w[1]);
        }
        if let Some(last) = trace.eta.last() {
            prop_assert!(*last <= 1e-10);
        }
    }

    #[test]
    fn trace_csv_agrees_with_json(a in 0.0..2.0f64, b in 0.0..2.0f64, z in pair()) {
        let line = RealLine::default();
        let op = LinearOperator::new(a, b, a + b + 1.0).unwrap();
        let opts = SolveOptions::new(1e-6, 10_000).require_admissible(false);
        let trace = solve(&line, &op, &z, &opts).unwrap();
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).unwrap();
        let json = serde_json::to_value(&trace).unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_slice());
        for (row, it) in reader.records().zip(json["iterates"].as_array().unwrap()) {
            let row = row.unwrap();
            prop_assert_eq!(row[1].parse::<f64>().unwrap(), it["point"]["first"].as_f64().unwrap());
            prop_assert_eq!(row[2].parse::<f64>().unwrap(), it["point"]["second"].as_f64().unwrap());
            let n: usize = row[0].parse().unwrap();
            if n > 0 {
                prop_assert_eq!(row[3].parse::<f64>().unwrap(), json["eta"][n - 1].as_f64().unwrap());
            }
        }
    }

    #[test]
    fn finite_product_order_is_a_partial_order(seed in 0u64..500) {
        let raw = oracle::random_instance(seed);
        let inst = parse_finite(&raw.json(), "prop").unwrap();
        let n = inst.space.len();
        let pairs: Vec<PairPoint<usize>> = (0..n * n).map(|i| PairPoint::new(i / n, i % n)).collect();
        let le = |a: &PairPoint<usize>, b: &PairPoint<usize>| product_leq(&inst.space, a, b).unwrap().is_le();
        for y in &pairs {
            prop_assert!(le(y, y));
            for v in &pairs {
                if le(y, v) && le(v, y) {
                    prop_assert_eq!(y, v);
                }
                for w in &pairs {
                    if le(y, v) && le(v, w) {
                        prop_assert!(le(y, w));
                    }
                }
                let h = d2(&inst.space, y, v).unwrap();
                prop_assert_eq!(h.clone(), d2(&inst.space, v, y).unwrap());
                let by_hand = (inst.space.distance(&y.first, &v.first) + inst.space.distance(&y.second, &v.second)) / oracle::q(2, 1);
                prop_assert_eq!(h, by_hand);
            }
        }
    }

    #[test]
    fn finite_symmetric_routes_agree_exactly(seed in 0u64..500) {
        let raw = oracle::random_instance(seed);
        let inst = parse_finite(&raw.json(), "prop").unwrap();
        let n = inst.space.len();
        for i in 0..n.pow(4) {
            let (y, v) = (PairPoint::new(i % n, (i / n) % n), PairPoint::new((i / n / n) % n, i / n / n / n));
            let op = inst.operator.as_ref();
            prop_assert_eq!(
                symmetric_value_coordinates(&inst.space, op, &y, &v).unwrap(),
                symmetric_value_product(&inst.space, op, &y, &v).unwrap()
            );
        }
    }
}
