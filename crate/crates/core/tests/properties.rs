use proptest::prelude::*;
use rand::Rng;

use tclose::corpus::{case_rng, random_distribution, random_table};
use tclose::formats::{parse_partition, parse_table_csv, write_partition, write_table_csv, Metadata, PartitionFile};
use tclose::kanon::{approx_k_anonymity, brute_force_k_anonymity};
use tclose::ldiv::build_simplex_hypergraph;
use tclose::metric::{check_closeness, emd_equal_distance, emd_four_point, emd_general};
use tclose::table::{generalize, group_cost, partition_cost, validate_partition};
use tclose::tclose::exact_tclose;
use tclose::{Group, Limits, Partition, Rational, SaSpace, Table};

fn table(seed: u64, max_n: usize, max_m: usize) -> Table {
    let mut rng = case_rng(seed, 0);
    let n = rng.gen_range(1..=max_n);
    let (m, q, s) = (rng.gen_range(0..=max_m), rng.gen_range(1..=3), rng.gen_range(1..=4));
    random_table(&mut rng, n, m, q, s)
}

/// Random partition of `0..n` from a label per row.
fn partition_from(labels: &[usize], n: usize) -> Partition {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (row, &l) in labels.iter().take(n).enumerate() {
        groups[l % n].push(row);
    }
    Partition::new(groups.into_iter().filter(|g| !g.is_empty()).map(|g| Group::new(g).unwrap()).collect())
}

fn rational() -> impl Strategy<Value = Rational> {
    (0i64..=12, 1i64..=12).prop_map(|(a, b)| Rational::new(a.min(b), b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn emd_is_a_bounded_metric(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = case_rng(seed, 1);
        let [x, y, z] = [0; 3].map(|_| random_distribution(&mut rng, dim, 5));
        let space = SaSpace::equal_distance_numbered(dim).unwrap();
        let d = |a, b| emd_general(a, b, &space).unwrap();
        let (xy, yx, xz, zy) = (d(&x, &y), d(&y, &x), d(&x, &z), d(&z, &y));
        prop_assert_eq!(&xy, &yx);
        prop_assert!(!xy.is_negative() && xy <= Rational::one());
        prop_assert!(xy <= xz + zy);
        prop_assert_eq!(xy.is_zero(), x == y);
        prop_assert!(d(&x, &x).is_zero());
        prop_assert_eq!(emd_equal_distance(&x, &y).unwrap(), xy);
    }

    #[test]
    fn four_point_matches_transport(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 2);
        let (a, b) = (random_distribution(&mut rng, 4, 9), random_distribution(&mut rng, 4, 9));
        let hub = SaSpace::hub_four_point();
        let fast = emd_four_point(&a, &b).unwrap();
        prop_assert_eq!(&fast, &emd_general(&a, &b, &hub).unwrap());
        prop_assert_eq!(fast, emd_four_point(&b, &a).unwrap());
    }

    #[test]
    fn partition_cost_is_sum_of_groups(seed in any::<u64>(), labels in prop::collection::vec(0usize..12, 12)) {
        let t = table(seed, 12, 4);
        let p = partition_from(&labels, t.len());
        prop_assert!(validate_partition(&t, &p).is_ok());
        let total = partition_cost(&t, &p).unwrap();
        let by_group: u64 = p.groups().iter().map(|g| group_cost(&t, g).unwrap()).sum();
        prop_assert_eq!(total, by_group);
        let released: u64 = generalize(&t, &p).unwrap().iter().map(|r| r.cost()).sum();
        prop_assert_eq!(total, released);
        prop_assert!(total <= (t.len() * t.num_qi()) as u64);
    }

    #[test]
    fn merging_groups_never_saves(seed in any::<u64>(), split in 1usize..11) {
        let t = table(seed, 12, 4);
        prop_assume!(t.len() >= 2);
        let cut = split.min(t.len() - 1);
        let (a, b) = (Group::new(0..cut).unwrap(), Group::new(cut..t.len()).unwrap());
        let whole = Group::new(0..t.len()).unwrap();
        prop_assert!(group_cost(&t, &whole).unwrap() >= group_cost(&t, &a).unwrap() + group_cost(&t, &b).unwrap());
    }

    #[test]
    fn exact_tclose_is_close_and_monotone(seed in any::<u64>(), a in rational(), b in rational()) {
        let t = table(seed, 8, 3);
        let space = SaSpace::equal_distance_for(&t);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let limits = Limits::default();
        let strict = exact_tclose(&t, &lo, &space, &limits).unwrap();
        let loose = exact_tclose(&t, &hi, &space, &limits).unwrap();
        let p = strict.partition().expect("the whole table is always close");
        for g in p.groups() {
            prop_assert!(check_closeness(&t, g, &lo, &space).unwrap());
        }
        prop_assert!(loose.cost().unwrap() <= strict.cost().unwrap());
    }

    #[test]
    fn approximation_is_k_anonymous_within_m(seed in any::<u64>(), k in 1usize..6) {
        let t = table(seed, 8, 3);
        let approx = approx_k_anonymity(&t, k).unwrap();
        let opt = brute_force_k_anonymity(&t, k, &Limits::default()).unwrap();
        prop_assert_eq!(approx.result.is_feasible(), opt.is_feasible());
        if let (Some(p), Some(cost), Some(best)) = (approx.result.partition(), approx.result.cost(), opt.cost()) {
            prop_assert!(p.groups().iter().all(|g| g.len() >= k));
            prop_assert!(cost >= best);
            prop_assert!(cost <= t.num_qi().max(1) as u64 * best);
        }
    }

    #[test]
    fn simplex_condition_holds(seed in any::<u64>()) {
        let t = table(seed, 12, 5);
        let h = build_simplex_hypergraph(&t).unwrap();
        prop_assert!(h.check_simplex(), "{}", h.dump());
    }

    #[test]
    fn table_csv_round_trip(seed in any::<u64>()) {
        let t = table(seed, 12, 5);
        let text = write_table_csv(&t).unwrap();
        prop_assert_eq!(parse_table_csv(&text, false).unwrap(), t);
    }

    #[test]
    fn partition_file_round_trip(seed in any::<u64>()) {
        let t = table(seed, 7, 3);
        let res = brute_force_k_anonymity(&t, 2, &Limits::default()).unwrap();
        match parse_partition(&write_partition(&res)).unwrap() {
            PartitionFile::Groups { partition, cost } => {
                prop_assert_eq!(Some(&partition), res.partition());
                prop_assert_eq!(cost, res.cost());
            }
            PartitionFile::Infeasible => prop_assert!(!res.is_feasible()),
        }
    }

    #[test]
    fn metadata_round_trip(pairs in prop::collection::vec(("[a-z_]{1,8}", "[ -~]{0,16}"), 0..8)) {
        let mut m = Metadata::new();
        for (k, v) in &pairs {
            m.set(k, v.trim());
        }
        prop_assert_eq!(Metadata::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn rational_text_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let q = Rational::new(n, d);
        prop_assert_eq!(q.to_string().parse::<Rational>().unwrap(), q);
    }
}
