//! Scratch calibration runs for the experiment-scale checks.
//! cargo run --release -p snd-core --example calibrate -- <which>

use snd_core::analysis::*;
use snd_core::grounddist::IccParams;
use snd_core::netcore::StateSeries;
use snd_core::simgen::*;
use snd_core::snd::SndConfig;
use std::time::Instant;

fn anomaly_run(
    seed: u64,
    exponent: f64,
    burnin: usize,
    window_frac: f64,
    spacing: usize,
    c_scale: u32,
    gamma: Option<i64>,
) -> (f64, f64, f64) {
    use rand::SeedableRng;
    let t0 = Instant::now();
    // Burn-in grows a segregated active structure at a low sampling
    // fraction; the analyzed window then samples harder.
    let params = SimParams {
        n: 2000,
        sf_exponent: exponent,
        p_nbr: 0.08,
        p_ext: 0.001,
        initial_adopters: 100,
        steps: burnin,
        activation_fraction: 0.1,
        seed,
    };
    let (network, burn) = gen_series(&params, &[]).unwrap();
    let anomaly_steps: Vec<usize> = (0..10).map(|k| 8 + spacing * k).collect();
    let mut states = vec![burn.states().last().unwrap().clone()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x77));
    for step in 0..99 {
        let (p_nbr, p_ext) = if anomaly_steps.contains(&step) {
            (0.07, 0.011)
        } else {
            (0.08, 0.001)
        };
        let next = evolve_state(&network, states.last().unwrap(), p_nbr, p_ext, window_frac, &mut rng);
        states.push(next);
    }
    let series = snd_core::netcore::StateSeries::from_states(states).unwrap();
    let truth: std::collections::BTreeSet<usize> =
        anomaly_steps.iter().map(|s| s + 1).collect();

    let model =
        snd_core::grounddist::ModelParams::Agnostic(snd_core::grounddist::ModelAgnosticParams {
            c_friendly: 1,
            c_neutral: 4 * c_scale,
            c_adverse: 16 * c_scale,
            ..Default::default()
        });
    let config = SndConfig {
        model,
        bank_policy: snd_core::snd::BankPolicy::PerBin { gamma },
        ..SndConfig::default()
    };
    let snd_measure = Measure::new(MeasureKind::Snd, &network, Some(&config));
    let ham_measure = Measure::new(MeasureKind::Hamming, &network, None);

    let snd_series = distance_series(&series, &snd_measure).unwrap();
    let ham_series = distance_series(&series, &ham_measure).unwrap();
    let snd_roc = roc(&anomaly_scores(&snd_series).unwrap(), &truth).unwrap();
    let ham_roc = roc(&anomaly_scores(&ham_series).unwrap(), &truth).unwrap();
    let tpr = tpr_at_fpr(&snd_roc, 0.3);
    let active_first = series.states()[0].active_count();
    let active_last = series.states().last().unwrap().active_count();
    println!(
        "seed {seed} exp {exponent} burnin {burnin} wfrac {window_frac} spacing {spacing} c{c_scale} gamma {gamma:?}: snd_auc {:.3} ham_auc {:.3} snd_tpr@0.3 {:.3} active {}->{} ({:.1}s)",
        snd_roc.auc,
        ham_roc.auc,
        tpr,
        active_first,
        active_last,
        t0.elapsed().as_secs_f64()
    );
    (snd_roc.auc, ham_roc.auc, tpr)
}

fn prediction_run(seed: u64) {
    let t0 = Instant::now();
    let params = SimParams {
        n: 2000,
        sf_exponent: -2.5,
        p_nbr: 0.12,
        p_ext: 0.01,
        initial_adopters: 160,
        steps: 5,
        activation_fraction: 0.1,
        seed,
    };
    let (network, series) = gen_series(&params, &[]).unwrap();
    let states: Vec<usize> = series.states().iter().map(|s| s.active_count()).collect();
    println!("active per state: {states:?}");
    let config = SndConfig::default();
    let methods = [
        PredictionMethod::Distance(MeasureKind::Snd),
        PredictionMethod::Distance(MeasureKind::Hamming),
        PredictionMethod::Distance(MeasureKind::QuadForm),
        PredictionMethod::Distance(MeasureKind::WalkDist),
        PredictionMethod::NhoodVoting,
        PredictionMethod::CommunityLp,
    ];
    let rows = prediction_experiment(
        &series,
        &network,
        &methods,
        &ExperimentParams {
            trials: 10,
            targets: 20,
            assignment_samples: 100,
            history_window: 3,
            seed,
        },
        Some(&config),
    )
    .unwrap();
    for row in rows {
        println!("  {:>14}: {:6.2} +- {:.2}", row.method, row.mean, row.stddev);
    }
    println!("  ({:.1}s)", t0.elapsed().as_secs_f64());
}

fn separation_run(seed: u64) {
    let t0 = Instant::now();
    let network = gen_scale_free(2000, -2.5, seed);
    let icc = IccParams::default();
    let config = SndConfig {
        model: snd_core::grounddist::ModelParams::Icc(icc),
        ..SndConfig::default()
    };
    let records = transition_separation_study(
        &network,
        &SeparationParams { pairs: 30, initial_adopters: 200, icc, seed },
        &config,
    )
    .unwrap();
    let snd_pos: Vec<f64> =
        records.iter().filter(|r| r.anomalous).map(|r| r.snd).collect();
    let snd_neg: Vec<f64> =
        records.iter().filter(|r| !r.anomalous).map(|r| r.snd).collect();
    let l1_pos: Vec<f64> = records.iter().filter(|r| r.anomalous).map(|r| r.l1).collect();
    let l1_neg: Vec<f64> =
        records.iter().filter(|r| !r.anomalous).map(|r| r.l1).collect();
    let exact = records.iter().all(|r| r.l1 == r.n_delta as f64);
    println!(
        "seed {seed}: snd_auc {:.3} l1_auc {:.3} l1==ndelta {exact} pairs {} ({:.1}s)",
        rank_auc(&snd_pos, &snd_neg),
        rank_auc(&l1_pos, &l1_neg),
        records.len() / 2,
        t0.elapsed().as_secs_f64()
    );
}

fn scaling_run() {
    let config = SndConfig::default();
    let mut last: Option<f64> = None;
    for n in [10_000usize, 20_000, 40_000, 80_000] {
        let network = gen_scale_free(n, -2.3, 7);
        let g1 = initial_state_seeded(&network, 1000, 7);
        let g2 = random_transition(&network, &g1, 200, 11).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..2 {
            let t0 = Instant::now();
            let v = snd_core::snd::fast_snd(&g1, &g2, &network, &config).unwrap();
            best = best.min(t0.elapsed().as_secs_f64());
            std::hint::black_box(v);
        }
        let ratio = last.map(|p| best / p).unwrap_or(f64::NAN);
        println!("n {n:>6}: {best:.3}s ratio {ratio:.2}");
        last = Some(best);
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    if which == "anomaly" || which == "all" {
        println!("== anomaly detection");
        for (exp, burnin, wfrac, spacing, c_scale, gamma) in [
            (-2.3, 200, 0.25, 6, 4, Some(0)),
            (-2.3, 200, 0.3, 6, 4, Some(0)),
            (-2.3, 200, 0.35, 6, 4, Some(0)),
            (-2.3, 220, 0.3, 6, 4, Some(0)),
            (-2.3, 220, 0.35, 6, 4, Some(0)),
            (-2.3, 200, 0.3, 7, 4, Some(0)),
        ] {
            let mut sums = (0.0, 0.0, 0.0);
            for seed in 0..5 {
                let (a, b, c) = anomaly_run(seed, exp, burnin, wfrac, spacing, c_scale, gamma);
                sums = (sums.0 + a, sums.1 + b, sums.2 + c);
            }
            println!(
                "  => mean snd_auc {:.3} ham_auc {:.3} tpr {:.3}",
                sums.0 / 5.0,
                sums.1 / 5.0,
                sums.2 / 5.0
            );
        }
    }
    if which == "dump" {
        use rand::SeedableRng;
        let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0);
        let params = SimParams {
            n: 2000,
            sf_exponent: -2.3,
            p_nbr: 0.08,
            p_ext: 0.001,
            initial_adopters: 100,
            steps: 200,
            activation_fraction: 0.1,
            seed,
        };
        let (network, burn) = gen_series(&params, &[]).unwrap();
        let anomaly_steps: Vec<usize> = (0..10).map(|k| 8 + 6 * k).collect();
        let mut states = vec![burn.states().last().unwrap().clone()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x77));
        for step in 0..99 {
            let (p_nbr, p_ext) = if anomaly_steps.contains(&step) {
                (0.07, 0.011)
            } else {
                (0.08, 0.001)
            };
            let next = evolve_state(&network, states.last().unwrap(), p_nbr, p_ext, 0.3, &mut rng);
            states.push(next);
        }
        let series = snd_core::netcore::StateSeries::from_states(states).unwrap();
        let config = SndConfig {
            model: snd_core::grounddist::ModelParams::Agnostic(
                snd_core::grounddist::ModelAgnosticParams {
                    c_friendly: 1,
                    c_neutral: 16,
                    c_adverse: 64,
                    ..Default::default()
                },
            ),
            bank_policy: snd_core::snd::BankPolicy::PerBin { gamma: Some(0) },
            ..SndConfig::default()
        };
        let m = Measure::new(MeasureKind::Snd, &network, Some(&config));
        let ds = distance_series(&series, &m).unwrap();
        let report = anomaly_scores(&ds).unwrap();
        let smap: std::collections::HashMap<usize, f64> =
            report.scores.iter().copied().collect();
        let rank_of: std::collections::HashMap<usize, usize> =
            report.ranked.iter().enumerate().map(|(r, &t)| (t, r + 1)).collect();
        for r in &ds.records {
            let prev = &series.states()[r.t - 1];
            let curr = &series.states()[r.t];
            let mut orphans = 0;
            let mut delta = 0;
            for v in 0..2000 {
                if prev.opinion(v) != curr.opinion(v) {
                    delta += 1;
                    let sign = curr.opinion(v);
                    let mut same = false;
                    for &ei in network.in_edge_ids(v) {
                        if prev.opinion(network.edges()[ei as usize].src as usize) == sign {
                            same = true;
                            break;
                        }
                    }
                    if !same {
                        orphans += 1;
                    }
                }
            }
            println!(
                "t {:>3} raw {:>9.1} per_unit {:>7.1} delta {:>3} orphans {:>2} S {:>7.3} rank {:>2} {}",
                r.t,
                r.raw,
                r.raw / delta.max(1) as f64,
                delta,
                orphans,
                smap.get(&r.t).copied().unwrap_or(f64::NAN),
                rank_of.get(&r.t).copied().unwrap_or(0),
                if anomaly_steps.contains(&(r.t - 1)) { "<== ANOMALY" } else { "" }
            );
        }
    }
    if which == "probe" {
        let burnin: usize = std::env::args()
            .nth(2)
            .and_then(|s| s.parse().ok())
            .unwrap_or(60);
        let model: String = std::env::args().nth(3).unwrap_or_else(|| "agnostic".into());
        let params = SimParams {
            n: 2000,
            sf_exponent: -2.3,
            p_nbr: 0.08,
            p_ext: 0.001,
            initial_adopters: 100,
            steps: burnin,
            activation_fraction: 0.1,
            seed: 0,
        };
        let (network, series) = gen_series(&params, &[]).unwrap();
        let base = series.states().last().unwrap().clone();
        // Largest same-sign active component (undirected view).
        let mut seen = vec![false; 2000];
        let mut best = 0usize;
        for start in 0..2000 {
            if seen[start] || !base.is_active(start) {
                continue;
            }
            let sign = base.opinion(start);
            let mut stack = vec![start];
            seen[start] = true;
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                let mut visit = |w: usize| {
                    if !seen[w] && base.opinion(w) == sign {
                        seen[w] = true;
                        stack.push(w);
                    }
                };
                for &ei in network.out_edge_ids(v) {
                    visit(network.edges()[ei as usize].dst as usize);
                }
                for &ei in network.in_edge_ids(v) {
                    visit(network.edges()[ei as usize].src as usize);
                }
            }
            best = best.max(size);
        }
        println!("burnin {burnin} model {model} largest same-sign component {best}");
        // Segregation: among active nodes with active in-neighbors, the
        // mean share of in-neighbors holding the same sign.
        let mut share = 0.0;
        let mut counted = 0;
        for v in 0..2000 {
            if !base.is_active(v) {
                continue;
            }
            let mut same = 0;
            let mut act = 0;
            for &ei in network.in_edge_ids(v) {
                let u = network.edges()[ei as usize].src as usize;
                if base.is_active(u) {
                    act += 1;
                    if base.opinion(u) == base.opinion(v) {
                        same += 1;
                    }
                }
            }
            if act > 0 {
                share += same as f64 / act as f64;
                counted += 1;
            }
        }
        println!(
            "active {} segregation {:.3} over {counted}",
            base.active_count(),
            share / counted as f64
        );
        let model_params = match model.as_str() {
            "icc" => snd_core::grounddist::ModelParams::Icc(Default::default()),
            "steep" => snd_core::grounddist::ModelParams::Agnostic(
                snd_core::grounddist::ModelAgnosticParams {
                    c_friendly: 1,
                    c_neutral: 16,
                    c_adverse: 64,
                    ..Default::default()
                },
            ),
            "steep32" => snd_core::grounddist::ModelParams::Agnostic(
                snd_core::grounddist::ModelAgnosticParams {
                    c_friendly: 1,
                    c_neutral: 32,
                    c_adverse: 128,
                    ..Default::default()
                },
            ),
            _ => snd_core::grounddist::ModelParams::default(),
        };
        let config = SndConfig {
            model: model_params,
            bank_policy: snd_core::snd::BankPolicy::PerBin { gamma: Some(0) },
            ..SndConfig::default()
        };
        for trial in 0..6 {
            let normal = evolve_state(
                &network, &base, 0.08, 0.001, 0.1,
                &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(trial),
            );
            let anom = evolve_state(
                &network, &base, 0.07, 0.011, 0.1,
                &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(900 + trial),
            );
            let d_n = snd_core::netcore::state_delta(&base, &normal);
            let d_a = snd_core::netcore::state_delta(&base, &anom);
            let rand_match = random_transition(&network, &base, d_n.max(1), 77 + trial).unwrap();
            let s_n = snd_core::snd::fast_snd(&base, &normal, &network, &config).unwrap();
            let s_a = snd_core::snd::fast_snd(&base, &anom, &network, &config).unwrap();
            let s_r = snd_core::snd::fast_snd(&base, &rand_match, &network, &config).unwrap();
            println!(
                "trial {trial}: normal {d_n} units -> snd {s_n:.0} ({:.0}/unit) | anomalous {d_a} -> {s_a:.0} ({:.0}/unit) | random {} -> {s_r:.0} ({:.0}/unit)",
                s_n / d_n.max(1) as f64,
                s_a / d_a.max(1) as f64,
                d_n.max(1),
                s_r / d_n.max(1) as f64,
            );
        }
    }
    if which == "predict" || which == "all" {
        println!("== prediction");
        prediction_run(0);
    }
    if which == "separation" || which == "all" {
        println!("== separation");
        for seed in 0..3 {
            separation_run(seed);
        }
    }
    if which == "scaling" || which == "all" {
        println!("== scaling");
        scaling_run();
    }
}
