use crate::beamform::BeamformingSolution;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::sysmodel::Scenario;

use super::wmmse::{weighted_mmse, WmmseOptions, WmmseOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachOptions {
    /// Outer stop: `F(lambda) <= delta`.
    pub delta: f64,
    pub max_outer: usize,
    pub inner: WmmseOptions,
}

impl Default for DinkelbachOptions {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            max_outer: 50,
            inner: WmmseOptions::default(),
        }
    }
}

/// Outer-loop state after an inner solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachState {
    pub lambda: f64,
    /// `sum R - lambda·P_T` at the inner solution.
    pub f_value: f64,
    pub inner_solution: WmmseOutcome,
    pub outer_iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachOutcome {
    pub solution: BeamformingSolution,
    /// EE of `solution`, the terminal parameter.
    pub lambda_star: f64,
    /// `F` at the last parameter the inner problem was solved for.
    pub f_value: f64,
    pub sum_rate: f64,
    pub total_power: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    /// Parameter used by each outer iteration, starting at 0.
    pub lambdas: Vec<f64>,
    pub f_values: Vec<f64>,
}

/// Dinkelbach EE maximization with WMMSE inner solves.
///
/// For fixed `lambda`, the inner layer maximizes
/// `sum R_k - lambda·(xi·sum p_k + P_const)` under the budget; the outer
/// update is `lambda <- sum R / P_T`. Every inner solve starts from the
/// default WMMSE initialization. At the updated `lambda` the previous
/// solution has `F = 0`, so if the fresh solve ends with `F < 0` the inner
/// problem is solved again starting from the previous solution. This keeps
/// `F >= 0` and the parameter sequence nondecreasing.
pub fn dinkelbach_ee(
    h: &ChannelRealization,
    sc: &Scenario,
    p_budget: f64,
    opts: &DinkelbachOptions,
) -> Result<DinkelbachOutcome> {
    if !(opts.delta > 0.0) {
        return Err(Error::Domain("delta must be > 0".into()));
    }
    let n0 = sc.n0();
    let mut lambda = 0.0;
    let mut lambdas = Vec::new();
    let mut f_values = Vec::new();
    let mut inner_iterations = 0;
    let mut warm: Option<Vec<_>> = None;
    let mut last: Option<DinkelbachState> = None;
    let mut converged = false;

    for outer in 0..opts.max_outer {
        let penalty = lambda * sc.xi();
        let mut inner = weighted_mmse(h, n0, p_budget, penalty, None, &opts.inner)?;
        inner_iterations += inner.iterations;
        let mut consumed = sc.consumed(inner.solution.transmit_power());
        let mut f_value = inner.sum_rate - lambda * consumed;
        if let Some(prev) = warm.as_deref() {
            // the previous solution has F = 0 at this lambda; a fresh solve
            // that lands below it is replaced by one started from it
            if f_value < 0.0 {
                inner = weighted_mmse(h, n0, p_budget, penalty, Some(prev), &opts.inner)?;
                inner_iterations += inner.iterations;
                consumed = sc.consumed(inner.solution.transmit_power());
                f_value = inner.sum_rate - lambda * consumed;
            }
        }
        lambdas.push(lambda);
        f_values.push(f_value);
        let next_lambda = inner.sum_rate / consumed;
        warm = Some(inner.solution.beams());
        last = Some(DinkelbachState {
            lambda,
            f_value,
            inner_solution: inner,
            outer_iteration: outer,
        });
        if f_value.abs() <= opts.delta {
            converged = true;
            break;
        }
        lambda = next_lambda;
    }

    let state = last.expect("max_outer >= 1");
    let solution = state.inner_solution.solution;
    let sum_rate = state.inner_solution.sum_rate;
    let total_power = sc.consumed(solution.transmit_power());
    Ok(DinkelbachOutcome {
        lambda_star: sum_rate / total_power,
        f_value: state.f_value,
        sum_rate,
        total_power,
        outer_iterations: state.outer_iteration + 1,
        inner_iterations,
        converged,
        lambdas,
        f_values,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_dims;
    use crate::optim::wmmse;
    use crate::sysmodel::SystemConfig;

    fn scenario() -> Scenario {
        Scenario::from_config(&SystemConfig::reference()).unwrap()
    }

    #[test]
    fn first_outer_step_is_plain_wmmse() {
        let sc = scenario();
        let h = generate_dims(3, 3, 4, 2).unwrap();
        let budget = sc.power.power_from_db(30.0);
        let opts = DinkelbachOptions {
            max_outer: 1,
            ..Default::default()
        };
        let d = dinkelbach_ee(&h, &sc, budget, &opts).unwrap();
        let w = wmmse(&h, sc.n0(), budget, &opts.inner).unwrap();
        assert_eq!(d.solution, w.solution);
        assert_eq!(d.lambdas, vec![0.0]);
    }

    #[test]
    fn converges_with_consistent_lambda() {
        let sc = scenario();
        for t in 0..10 {
            let h = generate_dims(3, 3, 6, t).unwrap();
            let budget = sc.power.power_from_db(40.0);
            let d = dinkelbach_ee(&h, &sc, budget, &DinkelbachOptions::default()).unwrap();
            assert!(d.converged);
            assert!(d.f_value.abs() <= 1e-3);
            assert!(d.solution.transmit_power() <= budget * (1.0 + 1e-10));
            let ee = d.sum_rate / d.total_power;
            assert!((ee - d.lambda_star).abs() <= 1e-6 * ee);
            for pair in d.lambdas.windows(2) {
                assert!(pair[1] >= pair[0]);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let sc = scenario();
        let h = generate_dims(3, 3, 6, 0).unwrap();
        let opts = DinkelbachOptions {
            delta: 0.0,
            ..Default::default()
        };
        assert!(dinkelbach_ee(&h, &sc, 1e-8, &opts).is_err());
    }
}
