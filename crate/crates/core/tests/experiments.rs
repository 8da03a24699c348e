use saturee_core::asympt;
use saturee_core::harness::{
    run, run_saturation, run_sweep, run_toy, run_tradeoff, write_csv, EePoint, ExperimentKind,
    ExperimentSpec, PowerGrid,
};
use saturee_core::satpower::{p_ee_toy, toy_ee};
use saturee_core::scalar::golden_section_max_log;
use saturee_core::sysmodel::{Scenario, SystemConfig};

fn spec(kind: ExperimentKind, grid: (f64, f64, f64), trials: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(SystemConfig::reference(), kind);
    s.grid = PowerGrid::new(grid.0, grid.1, grid.2).unwrap();
    s.trials = trials;
    s
}

fn rows_of<'a>(rows: &'a [EePoint], scheme: &str) -> Vec<&'a EePoint> {
    rows.iter().filter(|r| r.scheme == scheme).collect()
}

fn normalized(p_const: f64) -> SystemConfig {
    let mut cfg = SystemConfig::reference();
    cfg.normalized_p_const = Some(p_const);
    cfg
}

#[test]
fn single_point_single_trial_gives_one_row_per_scheme() {
    let r = run_sweep(&spec(ExperimentKind::Sweep, (20.0, 20.0, 1.0), 1)).unwrap();
    let schemes: Vec<&str> = r.rows.iter().map(|r| r.scheme.as_str()).collect();
    assert_eq!(
        schemes,
        ["mrt_mc", "mrt_asym", "lb", "no_iui_mc", "ub", "rzf_asym", "proposed", "baseline"]
    );
    for row in &r.rows {
        assert_eq!(row.p_dbm, 20.0);
        let mc = row.scheme.ends_with("_mc") || row.scheme == "proposed" || row.scheme == "baseline";
        assert_eq!(row.trials, if mc { 1 } else { 0 });
    }
}

#[test]
fn every_row_is_self_consistent_after_csv_round_trip() {
    let mut s = spec(ExperimentKind::Sweep, (-10.0, 46.0, 14.0), 5);
    s.bits = true;
    let out = run(&s).unwrap();
    let mut buf = Vec::new();
    write_csv(&out.rows, &mut buf).unwrap();
    for line in String::from_utf8(buf).unwrap().lines().skip(1) {
        let f: Vec<f64> = line.split(',').skip(2).take(3).map(|x| x.parse().unwrap()).collect();
        let (rate, power, ee) = (f[0], f[1], f[2]);
        assert!((ee - rate / power).abs() <= 1e-12 * ee.abs(), "{line}");
    }
}

#[test]
fn bits_flag_only_rescales_rates() {
    let nats = run(&spec(ExperimentKind::Saturation, (0.0, 0.0, 1.0), 1)).unwrap();
    let mut s = spec(ExperimentKind::Saturation, (0.0, 0.0, 1.0), 1);
    s.bits = true;
    let bits = run(&s).unwrap();
    for (a, b) in nats.rows.iter().zip(&bits.rows) {
        assert_eq!(a.p_dbm, b.p_dbm);
        assert_eq!(a.total_power, b.total_power);
        let ratio = b.sum_rate / a.sum_rate;
        assert!((ratio - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn workers_do_not_change_the_table() {
    let mut s = spec(ExperimentKind::Sweep, (-10.0, 46.0, 8.0), 12);
    let one = run(&s).unwrap().rows;
    s.workers = 4;
    let four = run(&s).unwrap().rows;
    assert_eq!(one, four);
}

#[test]
fn mrt_asym_curve_peaks_at_golden_argmax() {
    // grid reaching below P_LB so the peak is interior
    let r = run_sweep(&spec(ExperimentKind::Sweep, (-40.0, 46.0, 2.0), 1)).unwrap();
    let sc = &r.scenario;
    let curve = rows_of(&r.rows, "mrt_asym");
    let best = curve
        .iter()
        .max_by(|a, b| a.ee.partial_cmp(&b.ee).unwrap())
        .unwrap();
    let oracle = golden_section_max_log(
        |p| asympt::ee_mrt_asymptotic(p, sc),
        sc.n0() * 1e-9,
        1.0,
        1e-10,
    )
    .unwrap();
    let oracle_db = sc.power.power_to_db(oracle.x);
    assert!((best.p_dbm - oracle_db).abs() <= 2.0, "{} vs {oracle_db}", best.p_dbm);
    // the maximum is flat, so two golden searches agree only to ~1e-7 in P
    let peak_db = sc.power.power_to_db(r.mrt_asym_peak);
    assert!((peak_db - oracle_db).abs() < 1e-4, "{peak_db} vs {oracle_db}");
}

#[test]
fn mrt_monte_carlo_tracks_large_system_curve_at_low_snr() {
    // P/n0 from about -11 to 9 dB: below the interference-limited regime the
    // equal-power MRT EE is within 10% of its large-system value at M = N = 3
    let r = run_sweep(&spec(ExperimentKind::Sweep, (-105.0, -85.0, 5.0), 400)).unwrap();
    let mc = rows_of(&r.rows, "mrt_mc");
    let asym = rows_of(&r.rows, "mrt_asym");
    for (a, b) in mc.iter().zip(&asym) {
        assert!((a.ee / b.ee - 1.0).abs() <= 0.10, "{} dBm: {} vs {}", a.p_dbm, a.ee, b.ee);
    }
}

#[test]
fn sweep_curves_are_ordered() {
    let r = run_sweep(&spec(ExperimentKind::Sweep, (-10.0, 46.0, 4.0), 30)).unwrap();
    let lb = rows_of(&r.rows, "lb");
    let asym = rows_of(&r.rows, "mrt_asym");
    let ub = rows_of(&r.rows, "ub");
    let prop = rows_of(&r.rows, "proposed");
    let base = rows_of(&r.rows, "baseline");
    for i in 0..lb.len() {
        assert!(lb[i].sum_rate <= asym[i].sum_rate * (1.0 + 1e-12));
        assert!(asym[i].sum_rate <= ub[i].sum_rate);
        assert!(prop[i].total_power <= r.scenario.consumed(r.band.p_prop) * (1.0 + 1e-9));
        assert!(prop[i].ee >= 0.95 * base[i].ee);
    }
}

#[test]
fn saturation_rows_sit_on_their_curves() {
    let r = run_saturation(&spec(ExperimentKind::Saturation, (0.0, 0.0, 1.0), 1)).unwrap();
    let sc = &r.scenario;
    let b = &r.band;
    assert!(b.p_lb < b.p_prop && b.p_prop < b.p_ub);
    assert_eq!(r.rows.len(), 4);
    let lb = &r.rows[0];
    assert_eq!(lb.scheme, "lb");
    assert!((lb.ee / asympt::ee_lower_bound(b.p_lb, sc) - 1.0).abs() < 1e-12);
    let prop = &r.rows[3];
    assert!((prop.ee / b.gamma_se_est - 1.0).abs() < 1e-12);
    assert!(b.gamma_lb < prop.ee && prop.ee < b.gamma_ub);
}

#[test]
fn toy_policies() {
    let r = run_toy(&spec(ExperimentKind::Toy, (-20.0, 30.0, 0.5), 1)).unwrap();
    let p_ee = p_ee_toy(1.0).unwrap();
    let full = rows_of(&r.rows, "full_power");
    let clamped = rows_of(&r.rows, "clamped");
    let peak = toy_ee(p_ee, 1.0);
    for (f, c) in full.iter().zip(&clamped) {
        let p = 10f64.powf(f.p_dbm / 10.0);
        if p <= p_ee {
            assert_eq!(f, &&EePoint { scheme: "full_power".into(), ..(*c).clone() });
        } else {
            assert!((c.ee - peak).abs() <= 1e-15 * peak);
            assert!(f.ee < c.ee);
        }
    }
    assert!(toy_ee(2.0 * p_ee, 1.0) < peak);
}

#[test]
fn tradeoff_ordering_and_tangents() {
    let mut s = ExperimentSpec::new(normalized(13.0), ExperimentKind::Tradeoff);
    s.grid = PowerGrid::new(0.0, 30.0, 5.0).unwrap();
    s.trials = 100;
    let r = run_tradeoff(&s).unwrap();
    assert!(r.violations.is_empty(), "{:?}", r.violations);
    assert!(r.lb.ee < r.se.ee && r.se.ee < r.ub.ee);
    let peaks = rows_of(&r.rows, "se_peak");
    assert_eq!(peaks.len(), 1);
    // the tangent slope bounds every point of the Monte Carlo curve
    for row in rows_of(&r.rows, "se") {
        assert!(row.ee <= r.se.ee * (1.0 + 1e-3));
    }
}

#[test]
fn larger_static_power_moves_saturation_right_and_lowers_peak() {
    let run_with = |pc: f64| {
        let mut s = ExperimentSpec::new(normalized(pc), ExperimentKind::Tradeoff);
        s.grid = PowerGrid::new(0.0, 30.0, 10.0).unwrap();
        s.trials = 60;
        run_tradeoff(&s).unwrap()
    };
    let small = run_with(5.0);
    let large = run_with(15.0);
    for (a, b) in [(small.lb, large.lb), (small.se, large.se), (small.ub, large.ub)] {
        assert!(b.p > a.p);
        assert!(b.ee < a.ee);
    }
}

#[test]
fn normalized_mode_uses_unit_noise() {
    let sc = Scenario::from_config(&normalized(13.0)).unwrap();
    assert_eq!(sc.n0(), 1.0);
    assert_eq!(sc.pconst(), 13.0);
    assert_eq!(sc.power.power_from_db(10.0), 10.0);
}
