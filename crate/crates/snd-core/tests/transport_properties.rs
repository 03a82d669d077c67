//! Property-level checks of the transport layer: solver-vs-oracle
//! equivalence, the single-bank/mismatch-penalty equality, bank-append
//! invariance, metric axioms of the local-bank distance, and the
//! two-community location-sensitivity scenario.

mod common;

use common::{fig_scenario, histogram, random_histogram, random_metric};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snd_core::grounddist::{build_cost_graph, dense_ground_distance, ModelParams, Quantization, Sign};
use snd_core::transport::{
    emd_alpha, emd_hat, emd_star, extend_for_emd_star, oracle::lp_oracle, solve_transport,
    BankConfig, CostMatrix, Histogram,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_oracle(
        rows in 1usize..=8,
        cols in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sup = random_histogram(rows, 20, &mut rng);
        let dem = random_histogram(cols, 20, &mut rng);
        let costs = CostMatrix::new(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.gen_range(0..=50)).collect(),
        ).unwrap();
        let fast = solve_transport(&sup, &dem, &costs).unwrap();
        let slow = lp_oracle(&sup, &dem, &costs).unwrap();
        prop_assert_eq!(fast.total_cost, slow.total_cost);
        prop_assert_eq!(fast.shipped, slow.shipped);
    }

    #[test]
    fn integer_cost_scaling_is_exact(
        seed in any::<u64>(),
        factor in 1i64..=9,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let sup = random_histogram(n, 15, &mut rng);
        let dem = random_histogram(m, 15, &mut rng);
        let base: Vec<i64> = (0..n * m).map(|_| rng.gen_range(0..=40)).collect();
        let costs = CostMatrix::new(n, m, base.clone()).unwrap();
        let scaled = CostMatrix::new(n, m, base.iter().map(|c| c * factor).collect()).unwrap();
        let a = solve_transport(&sup, &dem, &costs).unwrap();
        let b = solve_transport(&sup, &dem, &scaled).unwrap();
        prop_assert_eq!(a.total_cost * factor as f64, b.total_cost);
    }

    #[test]
    fn plan_respects_marginals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=7);
        let m = rng.gen_range(1..=7);
        let sup = random_histogram(n, 12, &mut rng);
        let dem = random_histogram(m, 12, &mut rng);
        let costs = CostMatrix::new(n, m, (0..n * m).map(|_| rng.gen_range(0..=30)).collect())
            .unwrap();
        let plan = solve_transport(&sup, &dem, &costs).unwrap();
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; m];
        let mut shipped = 0.0;
        for &(i, j, f) in &plan.flows {
            prop_assert!(f > 0.0);
            row[i as usize] += f;
            col[j as usize] += f;
            shipped += f;
        }
        for i in 0..n {
            prop_assert!(row[i] <= sup[i] + 1e-9);
        }
        for j in 0..m {
            prop_assert!(col[j] <= dem[j] + 1e-9);
        }
        prop_assert!((shipped - plan.shipped).abs() < 1e-9);
    }
}

#[test]
fn single_bank_extension_equals_mismatch_penalty() {
    // With a metric ground distance and alpha >= 0.5 the bank route is
    // never cheaper than direct transport, so the two formulations
    // coincide.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..80 {
        let n = rng.gen_range(2..=9);
        let d = random_metric(n, 40, &mut rng);
        let p = random_histogram(n, 20, &mut rng);
        let q = random_histogram(n, 20, &mut rng);
        let alpha = 0.5 + rng.gen::<f64>() * 2.0;
        let hat = emd_hat(&p, &q, &d, alpha).unwrap();
        let alpha_value = emd_alpha(&p, &q, &d, alpha).unwrap();
        assert!(!alpha_value.metric_warning);
        let tolerance = 1e-9 * hat.abs().max(1.0);
        assert!(
            (alpha_value.value - hat).abs() <= tolerance,
            "case {case}: alpha {} vs hat {}",
            alpha_value.value,
            hat
        );
    }
}

#[test]
fn bank_append_invariance_on_equal_totals() {
    // Appending the same bank mass to both histograms, with a bank
    // distance of at least half the largest ground distance, leaves the
    // optimal transport cost untouched.
    let mut rng = ChaCha8Rng::seed_from_u64(0xba9c);
    for _ in 0..40 {
        let n = rng.gen_range(2..=8);
        let d = random_metric(n, 30, &mut rng);
        let p = random_histogram(n, 12, &mut rng);
        // Equal totals: copy the masses into a shuffled arrangement.
        let mut q_masses = p.as_slice().to_vec();
        for i in (1..q_masses.len()).rev() {
            q_masses.swap(i, rng.gen_range(0..=i));
        }
        let q = histogram(&q_masses);
        let base = solve_transport(&p, &q, &d).unwrap().total_cost;

        let omega = ((d.max_value() + 1) / 2) + rng.gen_range(0..5);
        for k in [0.0, 1.0, 10.0] {
            let mut pk = p.as_slice().to_vec();
            pk.push(k);
            let mut qk = q.as_slice().to_vec();
            qk.push(k);
            let mut data = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    data.push(d.at(i, j));
                }
                data.push(omega);
            }
            data.extend(std::iter::repeat(omega).take(n));
            data.push(0);
            let dk = CostMatrix::new(n + 1, n + 1, data).unwrap();
            let cost = solve_transport(&histogram(&pk), &histogram(&qk), &dk).unwrap().total_cost;
            assert_eq!(cost, base, "bank mass {k} changed the cost");
        }
    }
}

fn random_partition(n: usize, rng: &mut impl Rng) -> Vec<Vec<u32>> {
    let clusters = rng.gen_range(1..=n.min(4));
    let mut groups = vec![Vec::new(); clusters];
    for v in 0..n as u32 {
        groups[rng.gen_range(0..clusters)].push(v);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

fn conforming_config(d: &CostMatrix, clusters: Vec<Vec<u32>>) -> BankConfig {
    let gammas: Vec<Vec<i64>> = clusters
        .iter()
        .map(|cluster| {
            let mut intra = 0i64;
            for &p in cluster {
                for &q in cluster {
                    intra = intra.max(d.at(p as usize, q as usize));
                }
            }
            vec![((intra + 1) / 2).max(1)]
        })
        .collect();
    BankConfig::new(clusters, gammas, true).unwrap()
}

#[test]
fn local_bank_distance_is_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7717);
    for _ in 0..30 {
        let n = rng.gen_range(3..=8);
        let d = random_metric(n, 25, &mut rng);
        let config = conforming_config(&d, random_partition(n, &mut rng));
        let x = random_histogram(n, 10, &mut rng);
        let y = random_histogram(n, 10, &mut rng);
        let z = random_histogram(n, 10, &mut rng);
        let dist = |a: &Histogram, b: &Histogram| emd_star(a, b, &d, &config).unwrap();
        // Identity and symmetry are exact; the triangle check allows
        // for the final floating divisions.
        assert_eq!(dist(&x, &x), 0.0);
        assert_eq!(dist(&x, &y), dist(&y, &x));
        if x != y {
            assert!(dist(&x, &y) > 0.0);
        }
        let (xy, yz, xz) = (dist(&x, &y), dist(&y, &z), dist(&x, &z));
        assert!(xz <= xy + yz + 1e-9 * xz.abs().max(1.0), "{xz} > {xy} + {yz}");
    }
}

#[test]
fn empty_bin_removal_preserves_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    for _ in 0..30 {
        let n = rng.gen_range(3..=8);
        let d = random_metric(n, 25, &mut rng);
        let mut p = random_histogram(n, 8, &mut rng).as_slice().to_vec();
        let mut q = random_histogram(n, 8, &mut rng).as_slice().to_vec();
        // Plant shared empty bins.
        for v in 0..n {
            if rng.gen_bool(0.4) {
                p[v] = 0.0;
                q[v] = 0.0;
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&v| p[v] != 0.0 || q[v] != 0.0).collect();
        if keep.is_empty() || keep.len() == n {
            continue;
        }
        // An all-empty side triggers the uniform bank fallback, which
        // deliberately places capacity at every bin; bin removal is
        // only value-preserving with mass on both sides.
        if p.iter().sum::<f64>() == 0.0 || q.iter().sum::<f64>() == 0.0 {
            continue;
        }
        let gamma = d.max_value();
        let full = emd_star(
            &histogram(&p),
            &histogram(&q),
            &d,
            &BankConfig::per_bin(n, gamma),
        )
        .unwrap();
        let mut small_d = Vec::new();
        for &i in &keep {
            for &j in &keep {
                small_d.push(d.at(i, j));
            }
        }
        let stripped = emd_star(
            &histogram(&keep.iter().map(|&v| p[v]).collect::<Vec<_>>()),
            &histogram(&keep.iter().map(|&v| q[v]).collect::<Vec<_>>()),
            &CostMatrix::new(keep.len(), keep.len(), small_d).unwrap(),
            &BankConfig::per_bin(keep.len(), gamma),
        )
        .unwrap();
        assert_eq!(full, stripped);
    }
}

#[test]
fn single_global_bank_recovers_the_mismatch_penalty() {
    // One cluster, one bank, gamma = max(D): the local-bank distance
    // collapses to the mismatch-penalty form at alpha = 1.
    let mut rng = ChaCha8Rng::seed_from_u64(0x21);
    for _ in 0..30 {
        let n = rng.gen_range(2..=8);
        let d = random_metric(n, 30, &mut rng);
        let p = random_histogram(n, 12, &mut rng);
        let q = random_histogram(n, 12, &mut rng);
        let gamma = d.max_value();
        let star =
            emd_star(&p, &q, &d, &BankConfig::single_cluster(n, gamma)).unwrap();
        let hat = emd_hat(&p, &q, &d, 1.0).unwrap();
        let alpha = emd_alpha(&p, &q, &d, 1.0).unwrap().value;
        assert!((star - hat).abs() < 1e-9 * hat.max(1.0), "{star} vs {hat}");
        assert!((star - alpha).abs() < 1e-9 * alpha.max(1.0));
    }
}

#[test]
fn two_community_scenario_orders_by_location() {
    let (network, g1, g2, g3) = fig_scenario();
    let graph = build_cost_graph(
        &network,
        &g1,
        Sign::Pos,
        &ModelParams::default(),
        &Quantization::default(),
    )
    .unwrap();
    let d = dense_ground_distance(&graph, 64).unwrap().to_cost_matrix();
    let p = g1.positive_part();
    let q_spread = g2.positive_part();
    let q_planted = g3.positive_part();

    let config = BankConfig::per_bin(20, 2000);
    let near = emd_star(&p, &q_spread, &d, &config).unwrap();
    let far = emd_star(&p, &q_planted, &d, &config).unwrap();
    assert!(near < far, "local banks must prefer bridge spill-over: {near} vs {far}");

    // The mismatch-penalty family sees only the amount of new mass.
    let hat_near = emd_hat(&p, &q_spread, &d, 1.0).unwrap();
    let hat_far = emd_hat(&p, &q_planted, &d, 1.0).unwrap();
    assert_eq!(hat_near, hat_far);
    let alpha_near = emd_alpha(&p, &q_spread, &d, 1.0).unwrap().value;
    let alpha_far = emd_alpha(&p, &q_planted, &d, 1.0).unwrap().value;
    assert!((alpha_near - alpha_far).abs() <= 1e-9 * alpha_near.max(1.0));
}

#[test]
fn extension_keeps_cluster_distances_directional() {
    // Asymmetric ground distances show up verbatim in the bank blocks.
    let d = CostMatrix::new(2, 2, vec![0, 3, 7, 0]).unwrap();
    let cfg = BankConfig::per_bin(2, 1);
    let ext = extend_for_emd_star(&histogram(&[1.0, 0.0]), &histogram(&[0.0, 2.0]), &d, &cfg)
        .unwrap();
    // bin 0 -> bank at 1 rides D(0 -> 1); bank at 1 -> bin 0 rides
    // D(1 -> 0).
    assert_eq!(ext.costs.at(0, 3), 1 + 3);
    assert_eq!(ext.costs.at(3, 0), 1 + 7);
}
