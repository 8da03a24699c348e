use std::cell::RefCell;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::asympt;
use crate::beamform::{equal_power, mmse_alpha, mrt, sinr, sum_rate};
use crate::channel::{generate, ChannelRealization};
use crate::error::{Error, Result};
use crate::optim::{dinkelbach_ee, wmmse, DinkelbachOptions, WmmseOptions};
use crate::satpower::{
    self, compute_band, det_equiv_for, p_ee_toy, proposed_scheme, toy_ee, SaturationBand,
};
use crate::scalar::golden_section_max_log;
use crate::sysmodel::{Scenario, SystemConfig};

use super::output::EePoint;
use super::stats::Accumulator;
use super::ExperimentSpec;

/// Evaluates `f` for every trial index on a pool of `spec.workers` threads
/// and returns the results in trial order.
fn per_trial<T, F>(spec: &ExperimentSpec, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..spec.trials as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    })
}

/// `samples[trial][point]` -> one accumulator per point, summed in trial order.
fn accumulate(samples: &[Vec<(f64, f64)>], points: usize) -> Vec<Accumulator> {
    let mut acc = vec![Accumulator::default(); points];
    for trial in samples {
        for (a, &(rate, power)) in acc.iter_mut().zip(trial) {
            a.push(rate, power);
        }
    }
    acc
}

fn scale_rows(rows: &mut [EePoint], s: f64) {
    if s != 1.0 {
        rows.iter_mut().for_each(|r| r.scale_rate(s));
    }
}

fn channel(spec: &ExperimentSpec, trial: u64) -> Result<ChannelRealization> {
    generate(&spec.config, spec.seed, trial)
}

fn rzf_curve_point(cfg: &SystemConfig, sc: &Scenario, p: f64) -> Result<f64> {
    let alpha = cfg
        .rzf_alpha
        .unwrap_or_else(|| mmse_alpha(cfg.antennas, cfg.users, p, sc.n0()));
    let de = det_equiv_for(cfg, alpha)?;
    Ok(asympt::rate_rzf_asymptotic(p, sc, &de))
}

fn fmt_db(sc: &Scenario, p: f64) -> String {
    format!("{:.3} dB ({p:e})", sc.power.power_to_db(p))
}

fn band_lines(out: &mut String, sc: &Scenario, band: &SaturationBand) {
    let _ = writeln!(out, "P_LB   = {}", fmt_db(sc, band.p_lb));
    let _ = writeln!(out, "P_prop = {}", fmt_db(sc, band.p_prop));
    let _ = writeln!(out, "P_UB   = {}", fmt_db(sc, band.p_ub));
    let _ = writeln!(out, "P_RZF  = {}", fmt_db(sc, band.p_rzf));
    let _ = writeln!(
        out,
        "omega = {:.6}, G = {:e}, clamp = {:?}",
        band.omega, band.gap, band.clamp
    );
}

/// MRT, bound, RZF, proposed and baseline EE curves over the power grid.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<EePoint>,
    pub band: SaturationBand,
    pub scenario: Scenario,
    /// Unconstrained maximizer of the large-system MRT EE.
    pub mrt_asym_peak: f64,
}

impl SweepReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        band_lines(&mut s, &self.scenario, &self.band);
        let _ = writeln!(
            s,
            "large-system MRT EE peak at {}",
            fmt_db(&self.scenario, self.mrt_asym_peak)
        );
        s
    }
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepReport> {
    spec.validate()?;
    let cfg = &spec.config;
    let sc = Scenario::from_config(cfg)?;
    let band = compute_band(cfg)?;
    let grid = spec.grid.points();
    let powers: Vec<f64> = grid.iter().map(|&db| sc.power.power_from_db(db)).collect();
    let wopts = WmmseOptions::from_config(cfg);
    let dopts = DinkelbachOptions::from_config(cfg);
    let n0 = sc.n0();

    // per trial: [mrt, no_iui, proposed, baseline] samples per grid point
    let samples = per_trial(spec, |t| {
        let h = channel(spec, t)?;
        let dirs = mrt(&h)?;
        let gains: Vec<f64> = h.h.iter().map(|v| v.norm_squared()).collect();
        let mut out = vec![Vec::new(); 4];
        for &p in &powers {
            let consumed = sc.consumed(p);
            let r_mrt = sum_rate(&sinr(&h, &equal_power(dirs.clone(), p), n0));
            out[0].push((r_mrt, consumed));
            let share = p / sc.n() / n0;
            let r_free: f64 = gains.iter().map(|g| (share * g).ln_1p()).sum();
            out[1].push((r_free, consumed));
            let prop = proposed_scheme(&h, n0, p, &band, &wopts)?;
            out[2].push((prop.sum_rate, sc.consumed(prop.solution.transmit_power())));
            let base = dinkelbach_ee(&h, &sc, p, &dopts)?;
            out[3].push((base.sum_rate, base.total_power));
        }
        Ok(out)
    })?;

    let per_scheme = |i: usize| -> Vec<Accumulator> {
        let s: Vec<Vec<(f64, f64)>> = samples.iter().map(|t| t[i].clone()).collect();
        accumulate(&s, powers.len())
    };
    let mc_rows = |label: &str, acc: Vec<Accumulator>| -> Vec<EePoint> {
        grid.iter()
            .zip(&acc)
            .map(|(&db, a)| EePoint::from_samples(label, db, a))
            .collect()
    };
    let exact_rows = |label: &str, rate: &dyn Fn(f64) -> Result<f64>| -> Result<Vec<EePoint>> {
        grid.iter()
            .zip(&powers)
            .map(|(&db, &p)| Ok(EePoint::exact(label, db, rate(p)?, sc.consumed(p))))
            .collect()
    };

    let mut rows = Vec::new();
    rows.extend(mc_rows("mrt_mc", per_scheme(0)));
    rows.extend(exact_rows("mrt_asym", &|p| Ok(asympt::rate_mrt_asymptotic(p, &sc)))?);
    rows.extend(exact_rows("lb", &|p| Ok(asympt::rate_lower_bound(p, &sc)))?);
    rows.extend(mc_rows("no_iui_mc", per_scheme(1)));
    rows.extend(exact_rows("ub", &|p| Ok(asympt::rate_upper_bound(p, &sc)))?);
    rows.extend(exact_rows("rzf_asym", &|p| rzf_curve_point(cfg, &sc, p))?);
    rows.extend(mc_rows("proposed", per_scheme(2)));
    rows.extend(mc_rows("baseline", per_scheme(3)));
    scale_rows(&mut rows, spec.rate_scale());

    let lo = powers[0].min(band.p_lb) * 1e-3;
    let hi = powers.last().unwrap().max(band.p_ub);
    let mrt_asym_peak =
        golden_section_max_log(|p| asympt::ee_mrt_asymptotic(p, &sc), lo, hi, 1e-10)?.x;
    Ok(SweepReport {
        rows,
        band,
        scenario: sc,
        mrt_asym_peak,
    })
}

/// Maximum of `R(P)/(xi·P + P_const)` along one trade-off curve, i.e. the
/// slope of the steepest line from the origin touching the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePeak {
    pub p: f64,
    pub ee: f64,
}

/// Sum rate versus consumed power for `R_LB`, Monte Carlo WMMSE `R_SE` and
/// `R_UB`, with the tangent slope of each curve.
#[derive(Debug, Clone)]
pub struct TradeoffReport {
    pub rows: Vec<EePoint>,
    pub scenario: Scenario,
    pub lb: CurvePeak,
    pub se: CurvePeak,
    pub ub: CurvePeak,
    /// Grid points (dB) where `R_LB < R_SE < R_UB` fails. At low SNR the
    /// optimized sum rate can exceed `R_UB`, which assumes equal power.
    pub violations: Vec<f64>,
}

impl TradeoffReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, c) in [("LB", self.lb), ("SE", self.se), ("UB", self.ub)] {
            let _ = writeln!(
                s,
                "gamma_{name} = {:e} at {}",
                c.ee,
                fmt_db(&self.scenario, c.p)
            );
        }
        if self.violations.is_empty() {
            let _ = writeln!(s, "R_LB < R_SE < R_UB at every grid point");
        } else {
            let _ = writeln!(s, "R_LB < R_SE < R_UB fails at {:?} dB", self.violations);
        }
        s
    }
}

pub fn run_tradeoff(spec: &ExperimentSpec) -> Result<TradeoffReport> {
    spec.validate()?;
    let cfg = &spec.config;
    let sc = Scenario::from_config(cfg)?;
    let grid = spec.grid.points();
    let powers: Vec<f64> = grid.iter().map(|&db| sc.power.power_from_db(db)).collect();
    let wopts = WmmseOptions::from_config(cfg);
    let n0 = sc.n0();
    let channels = per_trial(spec, |t| channel(spec, t))?;

    let se_samples = |p: f64| -> Result<Accumulator> {
        let runs = per_trial(spec, |t| {
            let out = wmmse(&channels[t as usize], n0, p, &wopts)?;
            Ok((out.sum_rate, sc.consumed(out.solution.transmit_power())))
        })?;
        let mut acc = Accumulator::default();
        runs.iter().for_each(|&(r, q)| acc.push(r, q));
        Ok(acc)
    };

    let mut lb_rows = Vec::new();
    let mut se_rows = Vec::new();
    let mut ub_rows = Vec::new();
    let mut violations = Vec::new();
    for (&db, &p) in grid.iter().zip(&powers) {
        let consumed = sc.consumed(p);
        let r_lb = asympt::rate_lower_bound(p, &sc);
        let r_ub = asympt::rate_upper_bound(p, &sc);
        let se = EePoint::from_samples("se", db, &se_samples(p)?);
        if !(r_lb < se.sum_rate && se.sum_rate < r_ub) {
            violations.push(db);
        }
        lb_rows.push(EePoint::exact("lb", db, r_lb, consumed));
        se_rows.push(se);
        ub_rows.push(EePoint::exact("ub", db, r_ub, consumed));
    }

    let p_lb = satpower::p_lb(&sc);
    let p_ub = satpower::p_ub(&sc)?;
    let lb = CurvePeak {
        p: p_lb,
        ee: asympt::ee_lower_bound(p_lb, &sc),
    };
    let ub = CurvePeak {
        p: p_ub,
        ee: asympt::ee_upper_bound(p_ub, &sc),
    };
    // the SE peak lies inside [P_LB, P_UB]; search a bracket covering both
    // the band and the grid
    let lo = powers[0].min(p_lb) / 4.0;
    let hi = powers.last().unwrap().max(p_ub) * 4.0;
    let failure = RefCell::new(None);
    let best = golden_section_max_log(
        |p| match se_samples(p) {
            Ok(acc) => acc.mean_rate() / acc.mean_power(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-4,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let se_acc = se_samples(best.x)?;
    let se = CurvePeak {
        p: best.x,
        ee: se_acc.mean_rate() / se_acc.mean_power(),
    };

    let db = |p: f64| sc.power.power_to_db(p);
    let mut rows = Vec::new();
    rows.extend(lb_rows);
    rows.extend(se_rows);
    rows.extend(ub_rows);
    rows.push(EePoint::exact(
        "lb_peak",
        db(p_lb),
        asympt::rate_lower_bound(p_lb, &sc),
        sc.consumed(p_lb),
    ));
    rows.push(EePoint::from_samples("se_peak", db(se.p), &se_acc));
    rows.push(EePoint::exact(
        "ub_peak",
        db(p_ub),
        asympt::rate_upper_bound(p_ub, &sc),
        sc.consumed(p_ub),
    ));
    scale_rows(&mut rows, spec.rate_scale());
    Ok(TradeoffReport {
        rows,
        scenario: sc,
        lb,
        se,
        ub,
        violations,
    })
}

/// Saturation band for a configuration.
#[derive(Debug, Clone)]
pub struct SaturationReport {
    pub rows: Vec<EePoint>,
    pub band: SaturationBand,
    pub scenario: Scenario,
}

impl SaturationReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        band_lines(&mut s, &self.scenario, &self.band);
        let de = &self.band.det_equiv;
        let _ = writeln!(
            s,
            "RZF: alpha = {:e}, m = {:e}, Gamma = {:e}, Psi = {:e}",
            de.alpha, de.m0, de.gamma0, de.psi0
        );
        s
    }
}

/// Rows `lb`, `ub` and `rzf` sit on their own curves at their maximizers.
/// The `prop` row carries the interpolated EE estimate `gamma_SE` at `P_prop`.
pub fn run_saturation(spec: &ExperimentSpec) -> Result<SaturationReport> {
    spec.validate()?;
    let cfg = &spec.config;
    let sc = Scenario::from_config(cfg)?;
    let band = compute_band(cfg)?;
    let db = |p: f64| sc.power.power_to_db(p);
    let row = |label: &str, p: f64, rate: f64| EePoint::exact(label, db(p), rate, sc.consumed(p));
    let mut rows = vec![
        row("lb", band.p_lb, asympt::rate_lower_bound(band.p_lb, &sc)),
        row("ub", band.p_ub, asympt::rate_upper_bound(band.p_ub, &sc)),
        row(
            "rzf",
            band.p_rzf,
            asympt::rate_rzf_asymptotic(band.p_rzf, &sc, &band.det_equiv),
        ),
        row(
            "prop",
            band.p_prop,
            band.gamma_se_est * sc.consumed(band.p_prop),
        ),
    ];
    scale_rows(&mut rows, spec.rate_scale());
    Ok(SaturationReport {
        rows,
        band,
        scenario: sc,
    })
}

/// Proposed scheme against the Dinkelbach baseline on identical trials.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<EePoint>,
    pub band: SaturationBand,
    pub scenario: Scenario,
    pub grid: Vec<f64>,
    /// Mean EE of the proposed scheme over mean EE of the baseline, per grid point.
    pub ee_ratios: Vec<f64>,
    /// Mean transmit power chosen by the baseline, per grid point.
    pub baseline_power: Vec<f64>,
    pub proposed_seconds: f64,
    pub baseline_seconds: f64,
}

impl CompareReport {
    pub fn min_ee_ratio(&self) -> f64 {
        self.ee_ratios.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn speedup(&self) -> f64 {
        self.baseline_seconds / self.proposed_seconds
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        band_lines(&mut s, &self.scenario, &self.band);
        for ((db, r), p) in self.grid.iter().zip(&self.ee_ratios).zip(&self.baseline_power) {
            let _ = writeln!(
                s,
                "P = {db} dB: EE ratio {r:.6}, baseline transmit {}",
                fmt_db(&self.scenario, *p)
            );
        }
        let _ = writeln!(s, "min EE ratio = {:.6}", self.min_ee_ratio());
        let _ = writeln!(
            s,
            "wall-clock: proposed {:.6} s, baseline {:.6} s, speedup {:.3}",
            self.proposed_seconds,
            self.baseline_seconds,
            self.speedup()
        );
        s
    }
}

/// Both batches run on the calling thread so the timing ratio does not depend
/// on the scheduler; `spec.workers` is not used.
pub fn run_compare(spec: &ExperimentSpec) -> Result<CompareReport> {
    spec.validate()?;
    let cfg = &spec.config;
    let sc = Scenario::from_config(cfg)?;
    let band = compute_band(cfg)?;
    let grid = spec.grid.points();
    let powers: Vec<f64> = grid.iter().map(|&db| sc.power.power_from_db(db)).collect();
    let wopts = WmmseOptions::from_config(cfg);
    let dopts = DinkelbachOptions::from_config(cfg);
    let n0 = sc.n0();

    let start = Instant::now();
    let mut proposed = Vec::with_capacity(spec.trials);
    for t in 0..spec.trials as u64 {
        let h = channel(spec, t)?;
        let mut row = Vec::with_capacity(powers.len());
        for &p in &powers {
            let out = proposed_scheme(&h, n0, p, &band, &wopts)?;
            row.push((out.sum_rate, sc.consumed(out.solution.transmit_power())));
        }
        proposed.push(row);
    }
    let proposed_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut baseline = Vec::with_capacity(spec.trials);
    for t in 0..spec.trials as u64 {
        let h = channel(spec, t)?;
        let mut row = Vec::with_capacity(powers.len());
        for &p in &powers {
            let out = dinkelbach_ee(&h, &sc, p, &dopts)?;
            row.push((out.sum_rate, out.total_power));
        }
        baseline.push(row);
    }
    let baseline_seconds = start.elapsed().as_secs_f64();

    let acc_prop = accumulate(&proposed, powers.len());
    let acc_base = accumulate(&baseline, powers.len());
    let ee_ratios = acc_prop
        .iter()
        .zip(&acc_base)
        .map(|(a, b)| a.mean_ee() / b.mean_ee())
        .collect();
    let baseline_power = acc_base
        .iter()
        .map(|b| (b.mean_power() - sc.pconst()) / sc.xi())
        .collect();

    let mut rows: Vec<EePoint> = grid
        .iter()
        .zip(&acc_prop)
        .map(|(&db, a)| EePoint::from_samples("proposed", db, a))
        .collect();
    rows.extend(
        grid.iter()
            .zip(&acc_base)
            .map(|(&db, a)| EePoint::from_samples("baseline", db, a)),
    );
    scale_rows(&mut rows, spec.rate_scale());
    Ok(CompareReport {
        rows,
        band,
        scenario: sc,
        grid,
        ee_ratios,
        baseline_power,
        proposed_seconds,
        baseline_seconds,
    })
}

/// Single-link toy model `ln(1 + P)/(P + P_static)` with unit noise.
#[derive(Debug, Clone)]
pub struct ToyReport {
    pub rows: Vec<EePoint>,
    pub p_ee: f64,
    pub p_static: f64,
}

impl ToyReport {
    pub fn summary(&self) -> String {
        format!(
            "P_static = {}, P_EE = {:e} ({:.6} dB), EE max = {:e}\n",
            self.p_static,
            self.p_ee,
            10.0 * self.p_ee.log10(),
            toy_ee(self.p_ee, self.p_static)
        )
    }
}

/// Full-power and clamped-at-`P_EE` policies; grid values are dB of `P`.
pub fn run_toy(spec: &ExperimentSpec) -> Result<ToyReport> {
    spec.validate()?;
    let p_static = spec.config.toy_p_static;
    let p_ee = p_ee_toy(p_static)?;
    let grid = spec.grid.points();
    let row = |label: &str, db: f64, p: f64| EePoint::exact(label, db, p.ln_1p(), p + p_static);
    let mut rows: Vec<EePoint> = grid
        .iter()
        .map(|&db| row("full_power", db, 10f64.powf(db / 10.0)))
        .collect();
    rows.extend(
        grid.iter()
            .map(|&db| row("clamped", db, 10f64.powf(db / 10.0).min(p_ee))),
    );
    scale_rows(&mut rows, spec.rate_scale());
    Ok(ToyReport {
        rows,
        p_ee,
        p_static,
    })
}
