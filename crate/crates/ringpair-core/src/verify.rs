//! Randomized invariant suite behind `verify`: every module's stated
//! invariants checked over seeded random configurations, reporting the
//! worst residual per invariant. `fast` runs 100 configurations; `full`
//! runs 1000 and adds the high-Q convergence-order study.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::biphoton::{
    biphoton_state, car, herald, populations, psi2_intracavity_closed_form,
};
use crate::commutators::{
    commutator_residual, commutators_closed_form, solve_commutators_numeric, system_condition,
    CONDITION_LIMIT,
};
use crate::config::parse_config;
use crate::error::Result;
use crate::highq::{
    fit_order, highq_matrices, langevin_boundary_residual, limit_report, poles, LimitOrder,
    LimitStudy, LIMIT_QUANTITIES,
};
use crate::linalg::relative_error;
use crate::params::{
    cross_coupling, derive_coupling, ModeLabel, ModeParams, Process, PumpConfig, SystemConfig,
};
use crate::sweep::{emit_csv, evaluate_point, run_sweep, RowFlag};
use crate::transfer::{
    building_blocks, circulation_factor, gh_identity_residual, intracavity_transfer,
    intracavity_transfer_composed, output_transfer, output_transfer_composed,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

impl VerifyLevel {
    fn samples(&self) -> usize {
        match self {
            VerifyLevel::Fast => 100,
            VerifyLevel::Full => 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub checks: Vec<InvariantCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(
                f,
                "{} {:<42} max residual {:>12.3e}  (threshold {:.1e})",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check.max_residual,
                check.threshold,
            )?;
        }
        write!(
            f,
            "{}: {}/{} invariants passed",
            if self.all_passed() { "OK" } else { "FAILED" },
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
        )
    }
}

/// Seeded random configuration source. Pump strengths stay in the weak
/// regime |r| ≲ 1e-3 so the perturbative observables remain meaningful.
struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn mode(&mut self, label: ModeLabel, t: f64) -> ModeParams {
        let rho = self.rng.gen_range(0.3..0.995);
        let alpha = self.rng.gen_range(0.8..0.9995);
        ModeParams::from_couplings(label, rho, alpha, t).expect("sampled mode in range")
    }

    fn config(&mut self, equal_times: bool) -> SystemConfig {
        let t_a = self.rng.gen_range(0.5..2.0);
        let t_b = if equal_times { t_a } else { self.rng.gen_range(0.5..2.0) };
        let gain = self.rng.gen_range(1e-8..2e-4);
        let amplitude = self.rng.gen_range(0.1..2.0);
        let phase = self.rng.gen_range(0.0..std::f64::consts::TAU);
        let pump = PumpConfig::new(Process::Spdc, gain, amplitude, phase).expect("valid pump");
        SystemConfig::new(
            self.mode(ModeLabel::Signal, t_a),
            self.mode(ModeLabel::Idler, t_b),
            self.mode(ModeLabel::Pump, t_a),
            pump,
        )
        .expect("valid sampled config")
    }

    fn omega(&mut self, config: &SystemConfig) -> f64 {
        self.rng
            .gen_range(0.0..std::f64::consts::TAU / config.signal.round_trip_time)
    }
}

struct Suite {
    checks: Vec<InvariantCheck>,
}

impl Suite {
    fn record(&mut self, name: &'static str, max_residual: f64, threshold: f64) {
        self.checks.push(InvariantCheck {
            name,
            max_residual,
            threshold,
            passed: max_residual <= threshold && max_residual.is_finite(),
        });
    }
}

/// Distance of `order` outside the accepted convergence window [0.8, 2.2];
/// zero inside.
fn order_excess(order: Option<f64>) -> f64 {
    match order {
        None => 0.0, // identically-zero errors: the limit is exact
        Some(o) if o < 0.8 => 0.8 - o,
        Some(o) if o > 2.2 => o - 2.2,
        Some(_) => 0.0,
    }
}

pub fn run_verify(level: VerifyLevel) -> Result<VerifyReport> {
    let n = level.samples();
    let mut suite = Suite { checks: Vec::new() };

    // --- mode and pump parameter invariants ---
    {
        let mut sampler = Sampler::new(11);
        let mut norm_res: f64 = 0.0;
        let mut mono_res: f64 = 0.0;
        let mut ratio_res: f64 = 0.0;
        for _ in 0..n {
            let config = sampler.config(false);
            for mode in [&config.signal, &config.idler, &config.pump_mode] {
                norm_res = norm_res.max((mode.rho.powi(2) + mode.tau.powi(2) - 1.0).abs());
            }
            let g1 = sampler.rng.gen_range(0.0..2.0);
            let g2 = g1 + sampler.rng.gen_range(1e-6..1.0);
            let t = sampler.rng.gen_range(0.1..2.0);
            mono_res = mono_res
                .max(derive_coupling(g2, t).unwrap() - derive_coupling(g1, t).unwrap());
            let p = config.pump_parameters();
            let lhs = p.r_b.norm() * config.signal.round_trip_time;
            let rhs = p.r_a.norm() * config.idler.round_trip_time;
            if rhs > 0.0 {
                ratio_res = ratio_res.max((lhs - rhs).abs() / rhs);
            }
            let tau = cross_coupling(config.signal.rho).unwrap();
            norm_res = norm_res.max((tau - config.signal.tau).abs());
        }
        suite.record("params/rho_tau_normalization", norm_res, 1e-14);
        suite.record("params/coupling_monotonicity", mono_res.max(0.0), 0.0);
        suite.record("params/pump_ratio_identity", ratio_res, 1e-13);
    }

    // --- transfer-matrix invariants ---
    {
        let mut sampler = Sampler::new(22);
        let mut gh_res: f64 = 0.0;
        let mut closed_out: f64 = 0.0;
        let mut closed_in: f64 = 0.0;
        let mut inv_d: f64 = 0.0;
        for _ in 0..n {
            let config = sampler.config(false);
            let omega = sampler.omega(&config);
            let pair = output_transfer(&config, omega)?;
            let blocks = building_blocks(&config, omega);
            gh_res = gh_res.max(gh_identity_residual(&pair, &blocks));
            let composed = output_transfer_composed(&config, omega)?;
            closed_out = closed_out
                .max(pair.g.relative_distance(&composed.g))
                .max(pair.h.relative_distance(&composed.h));
            let inside = intracavity_transfer(&config, omega)?;
            let inside_composed = intracavity_transfer_composed(&config, omega)?;
            closed_in = closed_in
                .max(inside.g.relative_distance(&inside_composed.g))
                .max(inside.h.relative_distance(&inside_composed.h));

            let p = config.pump_parameters();
            let s_a = circulation_factor(
                config.signal.rho,
                config.signal.alpha,
                config.signal.theta(omega),
            )?;
            let s_b = circulation_factor(
                config.idler.rho,
                config.idler.alpha,
                config.idler.theta(omega),
            )?;
            let rr = (p.r_a * p.r_b).norm();
            if rr > 0.0 {
                let gap = (1.0 / pair.denominator - s_a * s_b).norm();
                inv_d = inv_d.max(gap / (rr * (s_a * s_b).norm_sqr()));
            }
        }
        suite.record("transfer/gh_identity", gh_res, 1e-12);
        suite.record("transfer/closed_vs_composed_output", closed_out, 1e-12);
        suite.record("transfer/closed_vs_composed_intracavity", closed_in, 1e-12);
        suite.record("transfer/inverse_d_circulation_bound", inv_d, 2.0);

        // Lossless decoupled unimodularity over a theta grid.
        let mut unimod: f64 = 0.0;
        let pump = PumpConfig::new(Process::Spdc, 0.0, 0.0, 0.0)?;
        for k in 0..64 {
            let rho = 0.3 + 0.69 * (k as f64 / 63.0);
            let config = SystemConfig::symmetric(rho, 1.0, 1.0, pump)?;
            for j in 0..32 {
                let omega = std::f64::consts::TAU * j as f64 / 32.0;
                let pair = output_transfer(&config, omega)?;
                unimod = unimod
                    .max((pair.g.aa.norm() - 1.0).abs())
                    .max((pair.g.bb.norm() - 1.0).abs());
            }
        }
        suite.record("transfer/lossless_unimodularity", unimod, 1e-12);

        // 2π-periodicity in theta (equal round-trip times).
        let mut periodic: f64 = 0.0;
        let mut sampler = Sampler::new(23);
        for _ in 0..n.min(200) {
            let config = sampler.config(true);
            let t = config.signal.round_trip_time;
            let omega = sampler.omega(&config);
            let a = output_transfer(&config, omega)?;
            let b = output_transfer(&config, omega + std::f64::consts::TAU / t)?;
            periodic = periodic
                .max(a.g.relative_distance(&b.g))
                .max(a.h.relative_distance(&b.h));
        }
        suite.record("transfer/theta_periodicity", periodic, 1e-12);
    }

    // --- commutator invariants ---
    {
        let mut sampler = Sampler::new(33);
        let mut closed_res: f64 = 0.0;
        let mut numeric_gap: f64 = 0.0;
        let mut c_ab_norm: f64 = 0.0;
        let mut grid_dev: f64 = 0.0;
        for _ in 0..n {
            let config = sampler.config(false);
            let omega = sampler.omega(&config);
            let pair = output_transfer(&config, omega)?;
            let closed = commutators_closed_form(&config);
            closed_res = closed_res.max(commutator_residual(&closed, &pair)?);
            if system_condition(&pair)? < CONDITION_LIMIT {
                let numeric = solve_commutators_numeric(&pair)?;
                numeric_gap = numeric_gap
                    .max((numeric.c_aa - closed.c_aa).abs())
                    .max((numeric.c_bb - closed.c_bb).abs())
                    .max((numeric.d_ab - closed.d_ab).norm());
                c_ab_norm = c_ab_norm.max(numeric.c_ab.norm());
            }
            // C_kk and D_ab are independent of the detuning: resolve on a
            // theta grid and compare against the first point.
            let reference = solve_commutators_numeric(&pair)?;
            for j in 1..8 {
                let omega_j = omega + j as f64 * 0.7;
                let pair_j = output_transfer(&config, omega_j)?;
                let set_j = solve_commutators_numeric(&pair_j)?;
                grid_dev = grid_dev
                    .max((set_j.c_aa - reference.c_aa).abs())
                    .max((set_j.c_bb - reference.c_bb).abs())
                    .max((set_j.d_ab - reference.d_ab).norm());
            }
        }
        suite.record("comms/closed_form_residual", closed_res, 1e-12);
        suite.record("comms/numeric_vs_closed_form", numeric_gap, 1e-10);
        suite.record("comms/c_ab_zero", c_ab_norm, 0.0);
        suite.record("comms/grid_independence", grid_dev, 1e-10);

        // C_kk also independent of rho: vary the couplings only.
        let mut rho_dev: f64 = 0.0;
        for k in 0..16 {
            let rho = 0.35 + 0.6 * (k as f64 / 15.0);
            let pump = PumpConfig::new(Process::Spdc, 1e-5, 1.0, 0.4)?;
            let config = SystemConfig::symmetric(rho, 0.97, 1.0, pump)?;
            let pair = output_transfer(&config, 0.9)?;
            let set = solve_commutators_numeric(&pair)?;
            let closed = commutators_closed_form(&config);
            rho_dev = rho_dev.max((set.c_aa - closed.c_aa).abs());
        }
        suite.record("comms/c_kk_rho_independence", rho_dev, 1e-10);
    }

    // --- biphoton invariants ---
    {
        let mut sampler = Sampler::new(44);
        let mut dual_path: f64 = 0.0;
        let mut phase_inv: f64 = 0.0;
        let mut car_theta: f64 = 0.0;
        let mut herald_theta: f64 = 0.0;
        let mut herald_range: f64 = 0.0;
        let mut pop_sum: f64 = 0.0;
        let mut pop_car: f64 = 0.0;
        for _ in 0..n {
            let config = sampler.config(false);
            let omega = sampler.omega(&config);
            let comms = commutators_closed_form(&config);
            let theta_p = config.pump.effective_phase();

            let inside = intracavity_transfer(&config, omega)?;
            let state = biphoton_state(&inside, &comms, theta_p);
            dual_path = dual_path.max(relative_error(
                state.psi2,
                psi2_intracavity_closed_form(&config, omega)?,
            ));

            // |psi2|^2, CAR and herald invariant under a pump-phase shift
            // of the whole configuration (the phase threads through the
            // transfer matrices and the state assembly together).
            let car_0 = car(&state, &comms);
            let herald_0 = herald(&state, &comms);
            for shift in [0.9, 2.7, 4.9] {
                let mut shifted_pump = config.pump;
                shifted_pump.phase += shift;
                let shifted_config = SystemConfig { pump: shifted_pump, ..config };
                let pair = intracavity_transfer(&shifted_config, omega)?;
                let comms_shifted = commutators_closed_form(&shifted_config);
                let shifted = biphoton_state(
                    &pair,
                    &comms_shifted,
                    shifted_config.pump.effective_phase(),
                );
                phase_inv = phase_inv
                    .max(
                        (shifted.psi2.norm_sqr() - state.psi2.norm_sqr()).abs()
                            / state.psi2.norm_sqr(),
                    )
                    .max((car(&shifted, &comms_shifted) - car_0).abs() / car_0)
                    .max((herald(&shifted, &comms_shifted) - herald_0).abs() / herald_0);
            }

            // CAR and herald independent of the detuning inside the ring.
            for j in 1..12 {
                let pair_j = intracavity_transfer(&config, omega + 0.55 * j as f64)?;
                let state_j = biphoton_state(&pair_j, &comms, theta_p);
                car_theta = car_theta.max((car(&state_j, &comms) - car_0).abs() / car_0);
                herald_theta =
                    herald_theta.max((herald(&state_j, &comms) - herald_0).abs() / herald_0);
            }
            herald_range = herald_range
                .max(-herald_0)
                .max(herald_0 - 1.0);

            let outside = output_transfer(&config, omega)?;
            let out_state = biphoton_state(&outside, &comms, theta_p);
            let pops = populations(&config, &out_state, &comms);
            pop_sum = pop_sum.max((pops.p0 + pops.p1a + pops.p1b + pops.p2 - 1.0).abs());
            let car_out = car(&out_state, &comms);
            if car_out.is_finite() {
                pop_car =
                    pop_car.max((pops.p2 / (pops.p1a + pops.p1b) - car_out).abs() / car_out);
            }
        }
        suite.record("biphoton/dual_path_psi2", dual_path, 1e-10);
        suite.record("biphoton/pump_phase_invariance", phase_inv, 1e-12);
        suite.record("biphoton/car_theta_independence", car_theta, 1e-10);
        suite.record("biphoton/herald_theta_independence", herald_theta, 1e-10);
        suite.record("biphoton/herald_in_unit_interval", herald_range.max(0.0), 0.0);
        suite.record("biphoton/populations_normalized", pop_sum, 1e-12);
        suite.record("biphoton/car_population_consistency", pop_car, 1e-12);

        // On resonance at fixed rho, |psi2_mrr|^2 grows with alpha.
        let mut mono_violation: f64 = 0.0;
        let pump = PumpConfig::new(Process::Spdc, 1e-5, 1.0, 0.0)?;
        let mut previous = f64::NEG_INFINITY;
        for k in 0..25 {
            let alpha = 0.75 + (0.999 - 0.75) * (k as f64 / 24.0);
            let config = SystemConfig::symmetric(0.95, alpha, 1.0, pump)?;
            let comms = commutators_closed_form(&config);
            let pair = intracavity_transfer(&config, 0.0)?;
            let state = biphoton_state(&pair, &comms, 0.0);
            let value = state.psi2.norm_sqr();
            if value < previous {
                mono_violation = mono_violation.max(previous - value);
            }
            previous = value;
        }
        suite.record("biphoton/alpha_monotonicity_on_resonance", mono_violation, 0.0);
    }

    // --- high-Q invariants ---
    {
        let mut sampler = Sampler::new(55);
        let mut vieta: f64 = 0.0;
        let mut pi_identity: f64 = 0.0;
        for _ in 0..n {
            let config = sampler.config(false);
            let p = poles(&config);
            let xa = config.signal.rho * config.signal.alpha;
            let xb = config.idler.rho * config.idler.alpha;
            let ya = (1.0 - xa) / config.signal.round_trip_time;
            let yb = (1.0 - xb) / config.idler.round_trip_time;
            let gap = config.pump.gain * config.pump.effective_amplitude().norm();
            let sum = ya / xa + yb / xb;
            let product = (ya / xa) * (yb / xb) - gap * gap;
            let scale = sum.abs().max(product.abs()).max(1.0);
            vieta = vieta
                .max((p.s_plus + p.s_minus - sum).abs() / scale)
                .max((p.s_plus * p.s_minus - product).abs() / scale);

            // pi_pm equals s_pm under x -> 1, y -> Gamma/2.
            let ga = config.signal.total_rate();
            let gb = config.idler.total_rate();
            let mean = 0.5 * (ga / 2.0 + gb / 2.0);
            let radical = (0.5 * (ga / 2.0 - gb / 2.0)).powi(2) + gap * gap;
            pi_identity = pi_identity
                .max((p.pi_plus - (mean + radical.sqrt())).abs())
                .max((p.pi_minus - (mean - radical.sqrt())).abs());
        }
        suite.record("highq/quadratic_pole_vieta", vieta, 1e-12);
        suite.record("highq/langevin_pole_identity", pi_identity, 1e-12);

        // First-order diagonal unimodularity for gamma' = 0.
        let mut unimod: f64 = 0.0;
        for k in 0..32 {
            let omega = 0.05 + 3.0 * (k as f64 / 31.0);
            let pump = PumpConfig::new(Process::Spdc, 0.0, 0.0, 0.0)?;
            let config = SystemConfig::new(
                ModeParams::from_rates(ModeLabel::Signal, 1.0, 0.0, 1e-3)?,
                ModeParams::from_rates(ModeLabel::Idler, 0.7, 0.0, 1e-3)?,
                ModeParams::from_rates(ModeLabel::Pump, 1.0, 0.0, 1e-3)?,
                pump,
            )?;
            let m = highq_matrices(&config, omega, LimitOrder::FirstOrder);
            unimod = unimod
                .max((m.g.aa.norm() - 1.0).abs())
                .max((m.g.bb.norm() - 1.0).abs());
        }
        suite.record("highq/first_order_unimodularity", unimod, 1e-12);

        // Langevin boundary condition recovered as O(gamma T).
        let ts = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let residuals: Vec<f64> = ts
            .iter()
            .map(|&t| langevin_boundary_residual(1.0, 0.2, 0.3, t))
            .collect::<Result<_>>()?;
        let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
        let order = fit_order(&ts, &residuals);
        let residual = if monotone { order_excess(order) } else { 1.0 };
        suite.record("highq/langevin_boundary_condition", residual, 0.0);

        if level == VerifyLevel::Full {
            let study = LimitStudy::halving(1.0, 0.3, 1e-5, 0.2, 1e-2, 4);
            let report = limit_report(&study)?;
            let mut worst: f64 = 0.0;
            for quantity in LIMIT_QUANTITIES {
                if !report.monotone(quantity) {
                    worst = worst.max(1.0);
                }
                worst = worst.max(order_excess(report.order(quantity)));
            }
            suite.record("highq/limit_convergence_orders", worst, 0.0);
        }
    }

    // --- sweep invariants ---
    {
        let config_text = "\
mode.rho = 0.95
mode.alpha = 0.99
pump.r = 1e-5
sweep.quantity = pair_rate_mrr
axis1.name = theta
axis1.min = 0.0
axis1.max = 6.283185307179586
axis1.count = 41
";
        let cfg = parse_config(config_text)?;
        let a = run_sweep(&cfg)?;
        let b = run_sweep(&cfg)?;
        let determinism = if emit_csv(&a) == emit_csv(&b) { 0.0 } else { 1.0 };
        suite.record("sweep/byte_determinism", determinism, 0.0);

        let spec = cfg.sweep.as_ref().expect("sweep spec");
        let mut grid_gap: f64 = 0.0;
        for k in [0usize, 7, 19, 40] {
            let theta = spec.axes[0].value(k);
            let (values, flag) = evaluate_point(
                &cfg,
                spec.quantity,
                &[(crate::config::SweepParam::Theta, theta)],
            );
            if flag != RowFlag::Ok {
                grid_gap = 1.0;
                continue;
            }
            for (standalone, swept) in values.iter().zip(&a.rows[k][1..]) {
                if standalone.to_bits() != swept.to_bits() {
                    grid_gap = grid_gap.max(1.0);
                }
            }
        }
        suite.record("sweep/grid_point_independence", grid_gap, 0.0);

        // CAR sentinel appears exactly at the lossless zero.
        let lossless = parse_config(
            "mode.rho = 0.9\nmode.alpha = 1.0\npump.r = 0\nsweep.quantity = car_mrr\n\
             axis1.name = theta\naxis1.min = 0.0\naxis1.max = 3.0\naxis1.count = 5\n",
        )?;
        let lossy = parse_config(
            "mode.rho = 0.9\nmode.alpha = 0.99\npump.r = 1e-5\nsweep.quantity = car_mrr\n\
             axis1.name = theta\naxis1.min = 0.0\naxis1.max = 3.0\naxis1.count = 5\n",
        )?;
        let sentinel_ok = run_sweep(&lossless)?
            .rows
            .iter()
            .all(|row| row[1] == f64::INFINITY)
            && run_sweep(&lossy)?.rows.iter().all(|row| row[1].is_finite());
        suite.record(
            "sweep/car_sentinel_placement",
            if sentinel_ok { 0.0 } else { 1.0 },
            0.0,
        );
    }

    Ok(VerifyReport {
        level,
        checks: suite.checks,
    })
}
