//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantity. Tolerances are pinned in the asserts.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mlob::hftest::{bucket_stats, run_test, VarianceKind};
use mlob::impact::classify_trades;
use mlob::ledger::{decompose, run_ledger, Perspective};
use mlob::limits::{convergence_study, verify_lln, DiffusionParams};
use mlob::parent::group_tape;
use mlob::pricing::{
    effective_volatility, price_closed_form, price_pde, replicate_path_detailed, solve_pde,
    GridSpec, MarketSpec, OptionPayoff, PricingError, SPREAD_COEF_THRESHOLD,
};
use mlob::simgen::{diffusion_increments, generate_tape, DiffusionConfig, SimConfig};
use mlob::stats::{ks_distance_standard_normal, ols_slope};
use mlob::tape::{decode_message, encode_message, single_tape, Side, TapeMessage};

const SQRT_2PI: f64 = 2.5066282746310002;

#[test]
fn criterion_01_exact_wealth_identity() {
    let configs = [
        (1_000usize, 0.3, 0.2, (100, 100), 11u64),
        (10_000, 0.7, 0.5, (1, 1_000), 22),
        (100_000, 0.2, 0.1, (10, 500), 33),
    ];
    for (n_trades, phi, q, volumes, seed) in configs {
        let (msgs, _) = generate_tape(&SimConfig {
            seed,
            n_trades,
            informed_fraction: phi,
            noise_move_prob: q,
            volume_range: volumes,
            ..Default::default()
        })
        .unwrap();
        let started = Instant::now();
        let tape = single_tape(msgs).unwrap();
        let ledger = run_ledger(&tape, Perspective::AggregatePassive);
        let d = decompose(&tape);
        for n in 0..d.len() {
            assert_eq!(
                ledger.rows[n + 1].wealth_half - ledger.rows[0].wealth_half,
                d.total_at(n),
                "identity broken at trade {n} of the {n_trades}-trade tape"
            );
        }
        let elapsed = started.elapsed().as_secs_f64();
        let budget = 1.0 * n_trades as f64 / 1e5;
        assert!(
            elapsed < budget.max(0.5),
            "{n_trades} trades took {elapsed:.3}s"
        );
        println!(
            "PASS criterion 1 [{n_trades} trades]: X_N+1 - X_1 == F+T+A at every n (0 tolerance), {:.0} ms",
            elapsed * 1e3
        );
    }
}

#[test]
fn criterion_02_codec_round_trip_and_fuzz() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    let mut round_trips = 0u32;
    while round_trips < 100_000 {
        let msg = random_valid_message(&mut rng);
        let frame = encode_message(&msg).unwrap();
        let (back, used) = decode_message(&frame).unwrap();
        assert_eq!(used, frame.len());
        assert_eq!(back, msg);
        assert_eq!(encode_message(&back).unwrap(), frame);
        round_trips += 1;
    }
    let mut errors = 0u64;
    let mut decoded = 0u64;
    let mut buf = vec![0u8; 64];
    for _ in 0..1_000_000u32 {
        let len = rng.random_range(0..=40usize);
        for b in buf.iter_mut().take(len) {
            *b = rng.random();
        }
        match decode_message(&buf[..len]) {
            Ok(_) => decoded += 1,
            Err(_) => errors += 1,
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "codec criterion took {elapsed:.2}s");
    println!(
        "PASS criterion 2: 100000 bit-exact round trips; 1000000 fuzzed frames -> {errors} errors, {decoded} accidental decodes, 0 crashes, {:.2} s",
        elapsed
    );
}

fn random_valid_message(rng: &mut ChaCha8Rng) -> TapeMessage {
    let locate = rng.random();
    let ts = rng.random();
    let side = if rng.random::<bool>() { Side::Bid } else { Side::Ask };
    let shares = rng.random_range(1..=u32::MAX);
    let price = rng.random_range(1..=u32::MAX);
    match rng.random_range(0..8u8) {
        0 => {
            let mut symbol = *b"        ";
            let len = rng.random_range(1..=8usize);
            for slot in symbol.iter_mut().take(len) {
                *slot = rng.random_range(b'A'..=b'Z');
            }
            TapeMessage::Directory { locate, symbol }
        }
        1 => TapeMessage::Timestamp {
            locate,
            timestamp_ns: ts,
        },
        2 => TapeMessage::Add {
            locate,
            timestamp_ns: ts,
            order_id: rng.random(),
            side,
            shares,
            price,
        },
        3 => TapeMessage::Execute {
            locate,
            timestamp_ns: ts,
            order_id: rng.random(),
            shares,
            match_id: rng.random(),
        },
        4 => TapeMessage::Cancel {
            locate,
            timestamp_ns: ts,
            order_id: rng.random(),
            shares,
        },
        5 => TapeMessage::Delete {
            locate,
            timestamp_ns: ts,
            order_id: rng.random(),
        },
        6 => TapeMessage::SpecialDeal {
            locate,
            timestamp_ns: ts,
            shares,
            price,
        },
        _ => TapeMessage::HiddenExec {
            locate,
            timestamp_ns: ts,
            side,
            shares,
            price,
            match_id: rng.random(),
        },
    }
}

#[test]
fn criterion_03_toy_model_statistics() {
    let (msgs, _) = generate_tape(&SimConfig {
        seed: 314,
        n_trades: 10_000,
        informed_fraction: 0.3,
        noise_move_prob: 0.2,
        ..Default::default()
    })
    .unwrap();
    let tape = single_tape(msgs).unwrap();
    let counts = classify_trades(&tape, Perspective::AggregateActive, false);
    let expected = 0.37;
    let se = (expected * (1.0 - expected) / 10_000f64).sqrt();
    let observed = counts.n_pos as f64 / counts.counted as f64;
    assert!(
        (observed - expected).abs() < 3.0 * se,
        "n_pos/N = {observed}, want {expected} +- {:.4}",
        3.0 * se
    );

    let (msgs, _) = generate_tape(&SimConfig {
        seed: 315,
        n_trades: 10_000,
        informed_fraction: 1.0,
        ..Default::default()
    })
    .unwrap();
    let informed = classify_trades(&single_tape(msgs).unwrap(), Perspective::AggregateActive, false);
    assert_eq!(informed.n_neg, 0);
    assert_eq!(informed.n_zero, 0);
    println!(
        "PASS criterion 3: phi=0.3,q=0.2 -> n_pos/N = {observed:.4} in 0.37 +- {:.4}; phi=1 -> n_neg = n_zero = 0",
        3.0 * se
    );
}

#[test]
fn criterion_04_adverse_selection_test_power() {
    let started = Instant::now();
    let run = |rho: f64, seed: u64| -> f64 {
        let pairs = diffusion_increments(&DiffusionConfig {
            n: 8 * 512,
            rho,
            sigma: 1.0,
            vol_l: 1.0,
            horizon: 1.0,
            seed,
        })
        .unwrap();
        run_test(&pairs, 8, VarianceKind::AsPrinted)
            .unwrap()
            .overall
            .unwrap()
    };
    let negative_hits = (0..100u64)
        .into_par_iter()
        .filter(|&s| run(-0.3, 40_000 + s) > 0.99)
        .count();
    let positive_hits = (0..100u64)
        .into_par_iter()
        .filter(|&s| run(0.3, 50_000 + s) < 0.01)
        .count();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(negative_hits >= 95, "rho=-0.3: only {negative_hits}/100 runs above 0.99");
    assert!(positive_hits >= 95, "rho=+0.3: only {positive_hits}/100 runs below 0.01");
    assert!(elapsed < 30.0, "power criterion took {elapsed:.1}s");
    println!(
        "PASS criterion 4: overall rejection > 0.99 in {negative_hits}/100 (rho=-0.3), < 0.01 in {positive_hits}/100 (rho=+0.3), {:.1} s",
        elapsed
    );
}

#[test]
fn criterion_05_clt_calibration() {
    let started = Instant::now();
    let zs: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|rep| {
            let pairs = diffusion_increments(&DiffusionConfig {
                n: 4096,
                rho: 0.0,
                sigma: 1.0,
                vol_l: 1.0,
                horizon: 1.0,
                seed: 600_000 + rep,
            })
            .unwrap();
            bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap()[0]
                .z()
                .unwrap()
        })
        .collect();
    let distance = ks_distance_standard_normal(&zs);
    let elapsed = started.elapsed().as_secs_f64();
    assert!(distance < 0.02, "KS distance {distance}");
    assert!(elapsed < 60.0, "CLT criterion took {elapsed:.1}s");
    println!(
        "PASS criterion 5: KS(Z over 10000 reps of 4096 increments, N(0,1)) = {distance:.4} < 0.02, {:.1} s",
        elapsed
    );
}

#[test]
fn criterion_06_functional_lln() {
    let result = verify_lln(|y| y.abs() / 2.0, 1.0, 1.0, 100_000, 4242).unwrap();
    let oracle = 1.0 / SQRT_2PI;
    assert!((result.limit_integral - oracle).abs() < 1e-8);
    let rel = (result.discrete_sum - oracle).abs() / oracle;
    assert!(rel < 0.01, "relative gap {rel}");
    println!(
        "PASS criterion 6: (1/N)Sum F(sqrt(N) dY) = {:.6} vs 1/sqrt(2pi) = {oracle:.6}, rel gap {rel:.4} < 1%",
        result.discrete_sum
    );
}

#[test]
fn criterion_07_diffusion_limit_convergence() {
    let params = DiffusionParams {
        rho: -0.5,
        sigma: 1.0,
        vol_l: 1.0,
        spread: 1.0,
        ..Default::default()
    };
    let study = convergence_study(&params, &[100, 1_000, 10_000, 100_000], 100, 777).unwrap();
    let medians: Vec<f64> = study.rows.iter().map(|r| r.median_error).collect();
    assert!(
        medians.windows(2).all(|w| w[1] < w[0]),
        "medians not strictly decreasing: {medians:?}"
    );
    assert!(
        study.loglog_rate > 0.3 && study.loglog_rate < 0.7,
        "log-log rate {}",
        study.loglog_rate
    );
    println!(
        "PASS criterion 7: median |X^N - X| = {medians:?}, log-log rate {:.3} in [0.3, 0.7]",
        study.loglog_rate
    );
}

#[test]
fn criterion_08_pricing_reduction_and_regime() {
    let market = MarketSpec {
        sigma: 0.2,
        rate: 0.0,
        spread_coef: SQRT_2PI,
        maturity: 1.0,
    };
    let closed = price_closed_form(&market, OptionPayoff::Call, 100.0, 100.0).unwrap();
    assert!((closed - 7.9656).abs() < 1e-3, "closed form {closed}");
    let pde = price_pde(&market, OptionPayoff::Call, 100.0, 100.0, None).unwrap();
    let rel = (pde - closed).abs() / closed;
    assert!(rel < 1e-3, "pde {pde} vs closed {closed}: rel {rel}");

    let ill = MarketSpec {
        spread_coef: SPREAD_COEF_THRESHOLD,
        ..market
    };
    assert!(matches!(
        effective_volatility(&ill),
        Err(PricingError::IllPosedRegime { .. })
    ));

    let prices: Vec<f64> = [1.5, 2.0, 3.0]
        .iter()
        .map(|&s| {
            price_closed_form(
                &MarketSpec {
                    spread_coef: s,
                    ..market
                },
                OptionPayoff::Call,
                100.0,
                100.0,
            )
            .unwrap()
        })
        .collect();
    assert!(prices[0] < prices[1] && prices[1] < prices[2]);
    println!(
        "PASS criterion 8: closed form {closed:.4} (~7.9656), PDE rel gap {rel:.2e} < 1e-3; s=sqrt(pi/2) ill-posed; call increasing in s {prices:?}"
    );
}

#[test]
fn criterion_09_replication() {
    let market = MarketSpec {
        sigma: 0.2,
        rate: 0.0,
        spread_coef: 2.0,
        maturity: 1.0,
    };
    // forward: no rebalancing, error at floating-point zero for every N
    for n in [8usize, 64, 512] {
        let grid = GridSpec {
            space_nodes: 400,
            time_steps: n,
            center: 100.0,
            half_width_sigmas: 6.0,
        };
        let surface = solve_pde(&market, |p| p, &grid).unwrap();
        for seed in 0..10u64 {
            let (outcome, _) = replicate_path_detailed(&surface, |p| p, 100.0, seed);
            assert!(
                outcome.terminal_error.abs() < 1e-9 * 100.0,
                "forward N={n}: error {}",
                outcome.terminal_error
            );
        }
    }

    // call: RMS terminal error over 200 paths decreasing, ~N^{-1/2},
    // with the order-kind rule holding at every step
    let strike = 100.0;
    let payoff = move |p: f64| (p - strike).max(0.0);
    let steps = [16usize, 64, 256, 1024];
    let mut rms = Vec::new();
    for &n in &steps {
        let grid = GridSpec {
            space_nodes: 800,
            time_steps: n,
            center: 100.0,
            half_width_sigmas: 6.0,
        };
        let surface = solve_pde(&market, payoff, &grid).unwrap();
        let sum_sq: f64 = (0..200u64)
            .into_par_iter()
            .map(|seed| {
                let (outcome, schedule) =
                    replicate_path_detailed(&surface, payoff, 100.0, 90_000 + seed);
                for step in &schedule {
                    let expected = if step.inventory_vol < 0.0 {
                        mlob::ledger::OrderKind::Limit
                    } else {
                        mlob::ledger::OrderKind::Market
                    };
                    assert_eq!(step.kind, expected, "order-kind rule violated");
                }
                outcome.terminal_error * outcome.terminal_error
            })
            .sum();
        rms.push((sum_sq / 200.0).sqrt());
    }
    assert!(
        rms.windows(2).all(|w| w[1] < w[0]),
        "rms not decreasing: {rms:?}"
    );
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(&rms)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let rate = -ols_slope(&pts);
    assert!(rate > 0.3 && rate < 0.7, "replication log-log rate {rate}");
    println!(
        "PASS criterion 9: forward error < 1e-9 at N in {{8,64,512}}; call RMS {rms:?} decreasing with rate {rate:.3} in [0.3, 0.7]; gamma-sign rule exact on every step"
    );
}

#[test]
fn criterion_10_parent_reconstruction() {
    // constructed tape with known groupings: exact recovery
    let mut msgs = vec![
        TapeMessage::Add {
            locate: 1,
            timestamp_ns: 0,
            order_id: 1,
            side: Side::Bid,
            shares: 500,
            price: 999_900,
        },
        TapeMessage::Add {
            locate: 1,
            timestamp_ns: 0,
            order_id: 2,
            side: Side::Ask,
            shares: 300,
            price: 1_000_100,
        },
        TapeMessage::Add {
            locate: 1,
            timestamp_ns: 0,
            order_id: 3,
            side: Side::Ask,
            shares: 300,
            price: 1_000_300,
        },
    ];
    // parent A: two children at ts 5 against the ask ladder
    msgs.push(exec(5, 2, 300));
    msgs.push(exec(5, 3, 100));
    // parent B: single child at ts 5 on the other side (direction split)
    msgs.push(exec(5, 1, 50));
    // parent C: child at a later timestamp
    msgs.push(exec(9, 3, 100));
    let tape = single_tape(msgs.clone()).unwrap();
    assert_eq!(tape.len(), 4);
    let (grouped, parents) = group_tape(&tape);
    assert_eq!(grouped.len(), 3);
    assert_eq!(
        parents.iter().map(|p| p.child_ns.clone()).collect::<Vec<_>>(),
        vec![vec![1, 2], vec![3], vec![4]]
    );
    assert_eq!(parents[0].volume, 400);
    let (again, _) = group_tape(&grouped);
    assert_eq!(again.trades, grouped.trades);

    // split-children tape: grouping strictly reduces n_zero, conserves volume
    let (msgs, _) = generate_tape(&SimConfig {
        seed: 95,
        n_trades: 2_000,
        informed_fraction: 0.4,
        noise_move_prob: 0.3,
        split_children: 3,
        volume_range: (30, 120),
        ..Default::default()
    })
    .unwrap();
    let raw = single_tape(msgs).unwrap();
    let (grouped, _) = group_tape(&raw);
    let before = classify_trades(&raw, Perspective::AggregateActive, false);
    let after = classify_trades(&grouped, Perspective::AggregateActive, false);
    assert!(
        after.n_zero < before.n_zero,
        "grouping did not reduce zero-impact trades: {} -> {}",
        before.n_zero,
        after.n_zero
    );
    assert_eq!(
        raw.trades.iter().map(|t| t.volume).sum::<u64>(),
        grouped.trades.iter().map(|t| t.volume).sum::<u64>()
    );
    println!(
        "PASS criterion 10: constructed groups recovered exactly; idempotent; split-children n_zero {} -> {} with volume conserved",
        before.n_zero, after.n_zero
    );
}

fn exec(ts: u64, order_id: u64, shares: u32) -> TapeMessage {
    TapeMessage::Execute {
        locate: 1,
        timestamp_ns: ts,
        order_id,
        shares,
        match_id: 0,
    }
}
