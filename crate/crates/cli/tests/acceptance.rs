//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use mmcoexist::access::{
    run_snapshot, run_snapshot_with_order, sense_at_bs, sense_at_mt, AccessScheme, SchemeKind,
    SenseMode, Thresholds,
};
use mmcoexist::antenna::{channel_matrix, total_gain_exact, ula_response, Path, PathSet};
use mmcoexist::deployment::{generate_deployment, trial_seed, Point, Scenario, ScenarioParams};
use mmcoexist::linkbudget::{link_rate, RxMode};
use mmcoexist::montecarlo::{run_sweep, run_trial, MetricsRecord};
use mmcoexist::slots::{numerology, FRAME_LENGTH_MS, SUBFRAMES_PER_FRAME};
use mmcoexist_cli::{run, run_with_threads, Experiment, RunConfig};
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn slot_timing() -> Outcome {
    let out = run(&RunConfig::defaults(Experiment::SlotsOverhead)).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = out.contents.lines().skip(1).collect();
    ensure(
        rows == ["3,120,125,9,1.389", "4,240,62.5,9,0.694"],
        format!("got {rows:?}"),
    )?;
    Ok("mu=3 1.389%, mu=4 0.694%".into())
}

fn numerology_table() -> Outcome {
    let scs = [15.0, 30.0, 60.0, 120.0, 240.0];
    let symbol = ["66.67", "33.33", "16.67", "8.33", "4.17"];
    let cp = [4.8, 2.4, 1.2, 0.6, 0.3];
    let slots = [1, 2, 4, 8, 16];
    let slot_len = [1000.0, 500.0, 250.0, 125.0, 62.5];
    let prb = ["0.18", "0.36", "0.72", "1.44", "2.88"];
    for mu in 0..5u32 {
        let n = numerology(mu).map_err(|e| e.to_string())?;
        let i = mu as usize;
        ensure(n.scs_khz == scs[i], format!("mu={mu} scs {}", n.scs_khz))?;
        ensure(
            format!("{:.2}", n.symbol_length_us) == symbol[i],
            format!("mu={mu} symbol {}", n.symbol_length_us),
        )?;
        ensure(
            n.cp_length_us == cp[i],
            format!("mu={mu} cp {}", n.cp_length_us),
        )?;
        ensure(
            n.slots_per_subframe == slots[i],
            format!("mu={mu} slots {}", n.slots_per_subframe),
        )?;
        ensure(
            n.slot_length_us == slot_len[i],
            format!("mu={mu} slot {}", n.slot_length_us),
        )?;
        ensure(
            n.symbols_per_slot == 14 && n.subcarriers_per_prb == 12,
            format!("mu={mu} counts"),
        )?;
        ensure(
            format!("{:.2}", n.prb_width_mhz) == prb[i],
            format!("mu={mu} prb {}", n.prb_width_mhz),
        )?;
    }
    ensure(
        FRAME_LENGTH_MS == 10.0 && SUBFRAMES_PER_FRAME == 10,
        "frame constants",
    )?;
    ensure(numerology(5).is_err(), "mu=5 accepted")?;
    Ok("all 5 numerologies match".into())
}

fn single_link() -> Outcome {
    const ORACLE_BPS: f64 = 11.27785997e9;
    let params = ScenarioParams {
        num_pairs: 1,
        ..ScenarioParams::default()
    };
    let scenario = generate_deployment(&params, 1).map_err(|e| e.to_string())?;
    let mut rates = Vec::new();
    for kind in SchemeKind::ALL {
        let snap = run_snapshot(&scenario, &AccessScheme::new(kind, Thresholds::default()))
            .map_err(|e| e.to_string())?;
        rates.push(snap.rates[0].bits_per_second);
    }
    for r in &rates {
        ensure(
            (r - ORACLE_BPS).abs() <= 1e-3 * ORACLE_BPS,
            format!("rate {r}"),
        )?;
    }
    Ok(format!(
        "{:.6} Gbit/s vs oracle {:.6}",
        rates[0] / 1e9,
        ORACLE_BPS / 1e9
    ))
}

fn beamforming() -> Outcome {
    for m in [2usize, 4, 8] {
        for (aod, aoa) in [(0.0, 0.0), (0.7, -0.3), (-1.2, 1.5)] {
            let paths = PathSet {
                paths: vec![Path {
                    gain: Complex64::new(1.0, 0.0),
                    aod,
                    aoa,
                }],
                tx_elements: m,
                rx_elements: m,
            };
            let h = channel_matrix(&paths).map_err(|e| e.to_string())?;
            let (w, r) = paths.steered_beams().map_err(|e| e.to_string())?;
            let g = total_gain_exact(&r, &h, &w).map_err(|e| e.to_string())?;
            let want = (m * m) as f64;
            ensure(
                (g - want).abs() <= 1e-9 * want,
                format!("M=N={m}: gain {g}"),
            )?;
        }
    }
    for m in 1..=64 {
        for angle in [-1.4, 0.0, 0.3, 1.0] {
            let norm = ula_response(m, angle).map_err(|e| e.to_string())?.norm();
            ensure((norm - 1.0).abs() <= 1e-12, format!("M={m}: norm {norm}"))?;
        }
    }
    Ok("gain = MN for M=N in {2,4,8}; unit norm for M in 1..=64".into())
}

fn hidden_node() -> Outcome {
    let params = ScenarioParams::default();
    let d = params.pair_distance_m;
    let ap = Point { x: 0.0, y: 0.0 };
    let sta = Point { x: d, y: 0.0 };
    let gnb = Point { x: 0.5, y: 2.0 };
    let a = (-25.0f64).to_radians();
    let ue = Point {
        x: gnb.x + d * a.cos(),
        y: gnb.y + d * a.sin(),
    };
    let scenario =
        Scenario::from_positions(params, &[ap, gnb], &[sta, ue], 0).map_err(|e| e.to_string())?;
    let err = |e: mmcoexist::Error| e.to_string();

    let th = Thresholds::default();
    let victim_omni = sense_at_mt(&scenario, &[1], 0, SenseMode::Omni).map_err(err)?;
    ensure(
        victim_omni.dbm().is_some_and(|p| p > th.omni_dbm),
        format!("victim hears {victim_omni:?}"),
    )?;
    for mode in [SenseMode::Omni, SenseMode::Directional] {
        let sensed = sense_at_bs(&scenario, &[0], 1, mode).map_err(err)?;
        ensure(
            sensed.watts() == 0.0 || sensed.dbm().unwrap() <= th.for_mode(mode),
            format!("{mode:?} LBT busy"),
        )?;
    }

    let order = [0, 1];
    let isolated = link_rate(&scenario, &[0], 0, RxMode::Directional)
        .map_err(err)?
        .bits_per_second;
    let lbt = run_snapshot_with_order(
        &scenario,
        &AccessScheme::new(SchemeKind::DirLbt, th),
        &order,
    )
    .map_err(err)?;
    ensure(
        lbt.transmitting == [true, true],
        format!("dir-lbt admitted {:?}", lbt.transmitting),
    )?;
    let hit = lbt.rates[0].bits_per_second;
    ensure(
        hit < isolated,
        format!("victim rate {hit} not below isolated {isolated}"),
    )?;

    let lbr = run_snapshot_with_order(
        &scenario,
        &AccessScheme::new(SchemeKind::DirLbtDirLbr, th),
        &order,
    )
    .map_err(err)?;
    ensure(
        lbr.transmitting == [true, false],
        format!("dir-lbt-dir-lbr admitted {:?}", lbr.transmitting),
    )?;
    ensure(
        lbr.rates[0].bits_per_second == isolated,
        "victim rate differs from isolated",
    )?;
    Ok(format!(
        "victim {:.3} -> {:.3} Gbit/s under dir-lbt, {:.3} with dir-lbr",
        isolated / 1e9,
        hit / 1e9,
        lbr.rates[0].bits_per_second / 1e9
    ))
}

fn fig4_records() -> &'static [MetricsRecord] {
    use std::sync::OnceLock;
    static RECORDS: OnceLock<Vec<MetricsRecord>> = OnceLock::new();
    RECORDS.get_or_init(|| {
        let cfg = RunConfig::defaults(Experiment::Fig4SumRateVsK);
        assert_eq!(
            (cfg.trials, cfg.theta_tx_deg[0], cfg.theta_rx_deg[0]),
            (1000, 60.0, 90.0)
        );
        run_sweep(&cfg.sweep_config()).expect("fig4 sweep")
    })
}

fn record(scheme: SchemeKind, k: f64) -> &'static MetricsRecord {
    fig4_records()
        .iter()
        .find(|r| r.scheme == scheme && r.sweep_value == k)
        .expect("record present")
}

fn k_range() -> (f64, f64) {
    let ks = fig4_records().iter().map(|r| r.sweep_value);
    (
        ks.clone().fold(f64::INFINITY, f64::min),
        ks.fold(0.0, f64::max),
    )
}

fn gbps(x: f64) -> f64 {
    x / 1e9
}

fn best_at_high_density() -> Outcome {
    let (_, k_max) = k_range();
    ensure(k_max >= 40.0, "grid stops below K=40")?;
    let best = record(SchemeKind::DirLbtDirLbr, k_max);
    let mut detail = format!(
        "K={k_max}: dir-lbt-dir-lbr {:.2}",
        gbps(best.mean_sum_rate_bps)
    );
    for other in [SchemeKind::DirLbt, SchemeKind::OmniLbt] {
        let o = record(other, k_max);
        let se = best.std_err_sum_rate.hypot(o.std_err_sum_rate);
        let margin = (best.mean_sum_rate_bps - o.mean_sum_rate_bps) / se;
        detail += &format!(
            ", {} {:.2} ({margin:.1} SE)",
            other,
            gbps(o.mean_sum_rate_bps)
        );
        ensure(margin > 3.0, detail.clone())?;
    }
    Ok(detail)
}

fn dirlbt_non_monotone() -> Outcome {
    let (_, k_max) = k_range();
    let rows: Vec<&MetricsRecord> = fig4_records()
        .iter()
        .filter(|r| r.scheme == SchemeKind::DirLbt)
        .collect();
    let peak = rows
        .iter()
        .max_by(|a, b| a.mean_sum_rate_bps.total_cmp(&b.mean_sum_rate_bps))
        .expect("rows");
    let last = record(SchemeKind::DirLbt, k_max);
    let margin = (peak.mean_sum_rate_bps - last.mean_sum_rate_bps)
        / peak.std_err_sum_rate.hypot(last.std_err_sum_rate);
    let detail = format!(
        "peak {:.2} at K={}, {:.2} at K={k_max} ({margin:.1} SE)",
        gbps(peak.mean_sum_rate_bps),
        peak.sweep_value,
        gbps(last.mean_sum_rate_bps)
    );
    ensure(margin > 3.0, detail.clone())?;
    Ok(detail)
}

fn omnilbt_lowest_at_low_density() -> Outcome {
    let (k_min, _) = k_range();
    let omni = record(SchemeKind::OmniLbt, k_min);
    let mut lowest = omni;
    for kind in SchemeKind::ALL {
        let r = record(kind, k_min);
        if r.mean_sum_rate_bps < lowest.mean_sum_rate_bps {
            lowest = r;
        }
    }
    let detail = format!(
        "K={k_min}: omni-lbt {:.3}, lowest is {} {:.3}",
        gbps(omni.mean_sum_rate_bps),
        lowest.scheme,
        gbps(lowest.mean_sum_rate_bps)
    );
    ensure(lowest.scheme == SchemeKind::OmniLbt, detail.clone())?;
    Ok(detail)
}

fn omni_rx_convergence() -> Outcome {
    let th = Thresholds::default();
    let pairs = [
        (SchemeKind::OmniLbtDirLbr, SchemeKind::OmniLbtOmniLbr),
        (SchemeKind::DirLbtDirLbr, SchemeKind::DirLbtOmniLbr),
    ];
    let mut compared = 0;
    for k in [5usize, 20, 40] {
        let mut params = ScenarioParams {
            num_pairs: k,
            ..ScenarioParams::default()
        };
        params.beams.rx_beamwidth_rad = std::f64::consts::TAU;
        for t in 0..300 {
            let snaps = run_trial(&params, &SchemeKind::ALL, th, trial_seed(11, t))
                .map_err(|e| e.to_string())?;
            let by_kind = |kind| snaps.iter().find(|s| s.scheme == kind).expect("scheme");
            for (dir, omni) in pairs {
                let (a, b) = (by_kind(dir), by_kind(omni));
                ensure(
                    a.transmitting == b.transmitting,
                    format!("K={k} trial {t}: {dir} vs {omni} decisions"),
                )?;
                ensure(
                    a.rates == b.rates,
                    format!("K={k} trial {t}: {dir} vs {omni} rates"),
                )?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} paired snapshots identical"))
}

/// Straight-line re-implementation of snapshot admission.
mod oracle {
    use mmcoexist::access::SchemeKind;
    use mmcoexist::deployment::Scenario;

    fn in_cone(from: (f64, f64), boresight: f64, to: (f64, f64), width: f64) -> bool {
        if width >= std::f64::consts::TAU {
            return true;
        }
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let cos = (dx * boresight.cos() + dy * boresight.sin()) / dx.hypot(dy);
        cos.clamp(-1.0, 1.0).acos() <= width / 2.0
    }

    pub fn admitted(s: &Scenario, scheme: SchemeKind, order: &[usize]) -> Vec<bool> {
        let p = &s.params;
        let b = &p.beams;
        let tx_main = 10f64.powf(b.tx_mainlobe_gain_db / 10.0);
        let rx_main = 10f64.powf(b.rx_mainlobe_gain_db / 10.0);
        let lambda = 299_792_458.0 / p.carrier_freq_hz;
        let ptx_mw = 10f64.powf(p.tx_power_dbm / 10.0);
        let pos = |n: &mmcoexist::deployment::NodePlacement| (n.position.x, n.position.y);
        let power_mw = |from: (f64, f64), to: (f64, f64), g: f64| {
            let d = (to.0 - from.0).hypot(to.1 - from.1);
            ptx_mw * g * (lambda / (4.0 * std::f64::consts::PI)).powi(2)
                / d.powf(p.pathloss_exponent)
        };
        let (omni_th, dir_th) = (-74.0, -64.0);
        let busy = |mw: f64, th: f64| mw > 0.0 && 10.0 * mw.log10() > th;

        let name = scheme.name();
        let dir_lbt = name.starts_with("dir-lbt");
        let lbr = if name.ends_with("dir-lbr") {
            Some(true)
        } else if name.ends_with("omni-lbr") {
            Some(false)
        } else {
            None
        };

        let mut tx = vec![false; s.bs.len()];
        for &j in order {
            let me = pos(&s.bs[j]);
            let mut sensed = 0.0;
            for i in (0..s.bs.len()).filter(|&i| tx[i]) {
                let other = pos(&s.bs[i]);
                let g_tx = if in_cone(other, s.bs[i].boresight, me, b.tx_beamwidth_rad) {
                    tx_main
                } else {
                    b.tx_sidelobe_gain
                };
                let g_rx = if !dir_lbt {
                    1.0
                } else if in_cone(me, s.bs[j].boresight, other, b.tx_beamwidth_rad) {
                    tx_main
                } else {
                    b.tx_sidelobe_gain
                };
                sensed += power_mw(other, me, g_tx * g_rx);
            }
            if busy(sensed, if dir_lbt { dir_th } else { omni_th }) {
                continue;
            }
            if let Some(dir_lbr) = lbr {
                let me = pos(&s.mt[j]);
                let mut sensed = 0.0;
                for i in (0..s.bs.len()).filter(|&i| tx[i]) {
                    let other = pos(&s.bs[i]);
                    let g_tx = if in_cone(other, s.bs[i].boresight, me, b.tx_beamwidth_rad) {
                        tx_main
                    } else {
                        b.tx_sidelobe_gain
                    };
                    let g_rx = if !dir_lbr {
                        1.0
                    } else if in_cone(me, s.mt[j].boresight, other, b.rx_beamwidth_rad) {
                        rx_main
                    } else {
                        b.rx_sidelobe_gain
                    };
                    sensed += power_mw(other, me, g_tx * g_rx);
                }
                if busy(sensed, if dir_lbr { dir_th } else { omni_th }) {
                    continue;
                }
            }
            tx[j] = true;
        }
        tx
    }
}

fn admission_oracle() -> Outcome {
    let th = Thresholds::default();
    let mut silenced = 0;
    for n in 0..100u64 {
        let params = ScenarioParams {
            num_pairs: 1 + (n % 4) as usize,
            ..ScenarioParams::default()
        };
        let scenario = generate_deployment(&params, trial_seed(5, n)).map_err(|e| e.to_string())?;
        for kind in SchemeKind::ALL {
            let snap =
                run_snapshot(&scenario, &AccessScheme::new(kind, th)).map_err(|e| e.to_string())?;
            let want = oracle::admitted(&scenario, kind, &snap.access_order);
            ensure(
                snap.transmitting == want,
                format!("scenario {n} {kind}: {:?} vs {want:?}", snap.transmitting),
            )?;
            silenced += want.iter().filter(|&&t| !t).count();
        }
    }
    ensure(silenced > 0, "oracle never silenced a pair")?;
    Ok(format!(
        "600 snapshots agree, {silenced} silenced decisions"
    ))
}

fn determinism() -> Outcome {
    let mut checked = Vec::new();
    for experiment in Experiment::ALL {
        let mut cfg = RunConfig::defaults(experiment);
        cfg.trials = 100;
        let reference = run_with_threads(&cfg, 1)
            .map_err(|e| e.to_string())?
            .contents;
        for threads in [2, 4, 7] {
            let again = run_with_threads(&cfg, threads)
                .map_err(|e| e.to_string())?
                .contents;
            ensure(
                again == reference,
                format!("{experiment} differs with {threads} threads"),
            )?;
        }
        checked.push(experiment.name());
    }
    Ok(format!(
        "byte-identical at 1/2/4/7 threads: {}",
        checked.join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 slot timing", slot_timing),
        ("2 numerology table", numerology_table),
        ("3 single-link oracle", single_link),
        ("4 beamforming", beamforming),
        ("5 hidden node", hidden_node),
        ("6a best sum-rate at high density", best_at_high_density),
        ("6b dir-lbt non-monotone in K", dirlbt_non_monotone),
        (
            "6c omni-lbt lowest at low density",
            omnilbt_lowest_at_low_density,
        ),
        ("7 omni-rx convergence", omni_rx_convergence),
        ("8 admission oracle", admission_oracle),
        ("9 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
