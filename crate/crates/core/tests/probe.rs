// Scratch calibration probes; removed before release.
use fracburgers::constants::BARRIER_REFERENCE_HALF;
use fracburgers::diagnostics::barrier_decay_check;
use fracburgers::diagnostics::{
    jump_battery, origin_mean_square, smooth_battery, trace_free_battery, weak_residual,
    weak_residual_regularized, ReferenceOperator,
};
use fracburgers::evolution::{
    entropy_audit, evolve, oleinik_max_slope, AuditBump, EntropyPair, EvolutionConfig, Trajectory,
};
use fracburgers::stationary::{viscosity_sweep, SweepSettings};
use fracburgers::{ApplyPath, FractionalKernel, GridSpec, OddField};
use std::time::Instant;

fn frozen_trajectory(v: &OddField, t_end: f64, steps: usize) -> Trajectory {
    let mut states = Vec::new();
    let u = v.mirror();
    for k in 0..=steps {
        let mut st = fracburgers::evolution::EvolutionState::new(u.clone());
        st.t = t_end * k as f64 / steps as f64;
        states.push(st);
    }
    Trajectory {
        states,
        completed: true,
        mass_drift: 0.0,
        boundary_exchange: 0.0,
        envelope: (-1.0, 1.0),
    }
}

#[test]
#[ignore]
fn probe_pipeline() {
    let eps_list = [0.1, 0.05, 0.02, 0.01];
    for (h, n) in [(0.01, 2000usize), (0.005, 4000)] {
        let g = GridSpec::new(h, n).unwrap();
        let kernel = FractionalKernel::build(g, 0.5).unwrap();
        let t0 = Instant::now();
        let sweep =
            viscosity_sweep(&eps_list, 0.5, &kernel, &SweepSettings::default(), true).unwrap();
        println!("=== h = {h}, L = {} (sweep {:?}) ===", g.length(), t0.elapsed());
        for m in &sweep.members {
            println!(
                "eps {:5}: iters {:3} (lin {:6}), res {:.2e}, norm_sq {:.6} <= {:.6}, monitor {:.6}, flags {:?}",
                m.epsilon, m.iterations, m.linear_iterations, m.residual_fp, m.norm_sq,
                m.energy_bound_rhs, m.monitor, m.flags
            );
        }
        println!("monitor_sup {:.6}, cauchy {:?}", sweep.monitor_sup, sweep.cauchy_window);
        let v = sweep.candidate().v.clone();
        let eps_min = sweep.candidate().epsilon;
        let norm_l2 = v.norms().l2;

        let t0 = Instant::now();
        let reference = ReferenceOperator::new(g, 0.5).unwrap();
        for phi in jump_battery() {
            let r = weak_residual(&v, &phi, &reference).unwrap();
            let rr = weak_residual_regularized(&v, eps_min, &phi, &reference).unwrap();
            println!("jump {:14}: pure {:.6}  regularized {:.6}", phi.name, r, rr);
        }
        for phi in trace_free_battery() {
            let r = weak_residual(&v, &phi, &reference).unwrap();
            println!("trace-free {:16}: pure {:+.3e}", phi.name, r);
        }
        for phi in smooth_battery() {
            let rr = weak_residual_regularized(&v, eps_min, &phi, &reference).unwrap();
            println!(
                "smooth {:18}: regularized {:+.3e}  (vs 1e-2*||v|| = {:.3e})",
                phi.name,
                rr,
                1e-2 * norm_l2
            );
        }
        let gamma = origin_mean_square(&v).unwrap();
        println!(
            "gamma: raw {:?} extrap {:.6} low_conf {} (diag {:?})",
            gamma.raw, gamma.extrapolated, gamma.low_confidence, t0.elapsed()
        );

        let t0 = Instant::now();
        let mut config = EvolutionConfig::new(0.0, 0.5, 0.5).unwrap();
        config.record_times = vec![0.05, 0.1, 0.25];
        let traj = evolve(v.mirror(), &config, &kernel).unwrap();
        let fin = traj.final_state();
        let sep = fin.u.l1_distance_window(&v.mirror(), 1.0).unwrap();
        println!(
            "evolution: steps {}, dt_last {:.3e}, envelope {:?}, separation {:.6} ({:?})",
            fin.steps, fin.dt_last, traj.envelope, sep, t0.elapsed()
        );
        for st in &traj.states {
            if st.t > 0.0 {
                let rep = oleinik_max_slope(&st.u, st.t).unwrap();
                println!(
                    "  t {:4}: max_slope {:.4} vs 1/t {:.4} (excess*t/h = {:+.3})",
                    st.t,
                    rep.max_slope,
                    1.0 / st.t,
                    (rep.max_slope - 1.0 / st.t) * st.t / h
                );
            }
        }

        let t0 = Instant::now();
        let mut dense_cfg = EvolutionConfig::new(0.0, 0.5, 0.5).unwrap();
        dense_cfg.record_every_step = true;
        let dense = evolve(v.mirror(), &dense_cfg, &kernel).unwrap();
        let m_cut = (0.25 / h).round() as usize;
        let mut pairs = Vec::new();
        for k in [-0.5, -0.25, 0.0, 0.25, 0.5] {
            pairs.push(EntropyPair::aligned(k, m_cut, h));
        }
        let bump = AuditBump { width: 1.0 };
        let audit_ev = entropy_audit(&dense, &pairs, &bump, &kernel).unwrap();
        let frozen = frozen_trajectory(&v, 0.5, 100);
        let audit_fr = entropy_audit(&frozen, &pairs, &bump, &kernel).unwrap();
        println!(
            "audit: evolved worst {:+.4e} (tol band 2(h+dt) = {:.3e}), frozen worst {:+.4e} ({:?})",
            audit_ev.worst,
            2.0 * (h + fin.dt_last),
            audit_fr.worst,
            t0.elapsed()
        );
        for row in &audit_fr.rows {
            println!("  frozen k {:+.2} r {:.3}: {:+.4e}", row.k, row.r_cut, row.residual);
        }
    }

    // Domain doubling: same h, twice the length.
    let g20 = GridSpec::new(0.01, 2000).unwrap();
    let g40 = GridSpec::new(0.01, 4000).unwrap();
    let k20 = FractionalKernel::build(g20, 0.5).unwrap();
    let k40 = FractionalKernel::build(g40, 0.5).unwrap();
    let s20 = viscosity_sweep(&eps_list, 0.5, &k20, &SweepSettings::default(), true).unwrap();
    let s40 = viscosity_sweep(&eps_list, 0.5, &k40, &SweepSettings::default(), true).unwrap();
    let v20 = &s20.candidate().v;
    let v40 = &s40.candidate().v;
    let mut sup = 0.0f64;
    for i in 0..500 {
        sup = sup.max((v20.values()[i] - v40.values()[i]).abs());
    }
    println!("domain doubling sup diff on [0,5]: {:.3e}", sup);
}

#[test]
#[ignore]
fn probe_half_order_factorization() {
    for (h, n) in [(0.1, 160), (0.05, 320), (0.025, 640), (0.05, 640), (0.025, 1280)] {
        let g = GridSpec::new(h, n).unwrap();
        let k_full = FractionalKernel::build(g, 0.5).unwrap();
        let k_half = FractionalKernel::build(g, 0.25).unwrap();
        let v = OddField::from_fn(g, 0.0, |x| x * (-x * x).exp());
        let w = OddField::from_fn(g, 0.0, |x| x * (-0.5 * x * x).exp() * (1.3 * x).cos());
        let a = k_full.bilinear(&v, &w).unwrap();
        let lv = k_half.apply_odd(&v, ApplyPath::Fft).unwrap();
        let lw = k_half.apply_odd(&w, ApplyPath::Fft).unwrap();
        let prod: f64 = 2.0
            * h
            * lv.values()
                .iter()
                .zip(lw.values())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let aq = k_full.quadratic(&v).unwrap();
        let prodq: f64 = 2.0 * h * lv.values().iter().map(|a| a * a).sum::<f64>();
        println!(
            "h = {h:6}  L = {:5}  a = {a:.10}  factored = {prod:.10}  rel gap = {:.3e}  quad gap = {:.3e}",
            g.length(),
            (a - prod).abs() / a.abs(),
            (aq - prodq).abs() / aq.abs()
        );
    }
}

#[test]
#[ignore]
fn probe_barrier() {
    let report = barrier_decay_check(0.5, 0.25, &BARRIER_REFERENCE_HALF).expect("report");
    println!(
        "sup = {:.6}  exponent = {:.6} (target {:.6})  bound_c = {:.6}  sym = {:.3e}",
        report.sup_norm,
        report.fitted_exponent,
        0.25 - 0.5,
        report.bound_constant,
        report.symmetry_defect
    );
    for (x, got, want) in &report.reference_rows {
        println!("x = {x:5}: got {got:.9}  want {want:.9}  diff {:+.3e}", got - want);
    }
}

#[test]
#[ignore]
fn probe_damping() {
    use fracburgers::stationary::{
        fixed_point_solve, solve_linearized, StationaryConfig, StationaryOperator,
        TruncationProfiles,
    };
    let g = GridSpec::new(0.01, 2000).unwrap();
    let kernel = FractionalKernel::build(g, 0.5).unwrap();
    for eps in [0.05, 0.02, 0.01] {
        for damping in [0.5, 0.25, 0.1] {
            let config = StationaryConfig::for_epsilon(eps, 0.5, g).unwrap();
            let op = StationaryOperator::new(config.clone(), &kernel).unwrap();
            let profiles = TruncationProfiles::new(&config).unwrap();
            let mut v = fracburgers::stationary::triangle_lift(g);
            let mut history = Vec::new();
            for _ in 0..80 {
                let (f_v, _) = solve_linearized(&v, &op, &profiles, Some(v.values())).unwrap();
                let d: Vec<f64> = f_v
                    .values()
                    .iter()
                    .zip(v.values())
                    .map(|(f, c)| f - c)
                    .collect();
                let mut q = 0.0;
                for (a, b) in op.apply(&d).iter().zip(&d) {
                    q += a * b;
                }
                let res = q.max(0.0).sqrt();
                history.push(res);
                let vals: Vec<f64> = v
                    .values()
                    .iter()
                    .zip(&d)
                    .map(|(c, di)| c + damping * di)
                    .collect();
                v = OddField::new(g, vals, 1.0).unwrap();
                if res < 1e-10 {
                    break;
                }
            }
            let tail_ratio = if history.len() >= 6 {
                let k = history.len();
                (history[k - 1] / history[k - 4]).powf(1.0 / 3.0)
            } else {
                f64::NAN
            };
            let shown: Vec<String> = history
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 10 == 0 || *i + 1 == history.len())
                .map(|(i, r)| format!("{i}:{r:.2e}"))
                .collect();
            println!(
                "eps {eps:5} damping {damping:4}: iters {:3} ratio {tail_ratio:.4}  [{}]",
                history.len(),
                shown.join(" ")
            );
        }
    }
    // Warm-started ladder with default settings, sequential.
    let t0 = Instant::now();
    let mut warm: Option<fracburgers::OddField> = None;
    for eps in [0.1, 0.05, 0.02, 0.01] {
        let config = StationaryConfig::for_epsilon(eps, 0.5, g).unwrap();
        match fixed_point_solve(&config, &kernel, warm.as_ref()) {
            Ok(sol) => {
                println!(
                    "warm ladder eps {eps:5}: iters {:3} res {:.2e} converged {}",
                    sol.iterations, sol.residual_fp, sol.flags.converged
                );
                warm = Some(sol.v.clone());
            }
            Err(e) => {
                println!("warm ladder eps {eps:5}: FAILED {e}");
                break;
            }
        }
    }
    println!("warm ladder time {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_sweep_adaptive() {
    let eps_list = [0.1, 0.05, 0.02, 0.01];
    let g = GridSpec::new(0.01, 2000).unwrap();
    let kernel = FractionalKernel::build(g, 0.5).unwrap();
    for parallel in [false, true] {
        let t0 = Instant::now();
        match viscosity_sweep(&eps_list, 0.5, &kernel, &SweepSettings::default(), parallel) {
            Ok(sweep) => {
                println!("parallel={parallel}: {:?}", t0.elapsed());
                for m in &sweep.members {
                    println!(
                        "  eps {:5}: iters {:4} (lin {:6}), res {:.2e}, flags conv {} bounds {} trunc {} energy {}",
                        m.epsilon, m.iterations, m.linear_iterations, m.residual_fp,
                        m.flags.converged, m.flags.bounds_ok, m.flags.truncation_inactive,
                        m.flags.energy_bound_ok
                    );
                }
            }
            Err(e) => println!("parallel={parallel}: FAILED {e} ({:?})", t0.elapsed()),
        }
    }
}

#[test]
#[ignore]
fn probe_single_member() {
    use fracburgers::stationary::{fixed_point_solve, StationaryConfig};
    let g = GridSpec::new(0.01, 2000).unwrap();
    let kernel = FractionalKernel::build(g, 0.5).unwrap();
    let config = StationaryConfig::for_epsilon(0.01, 0.5, g).unwrap();
    let t0 = Instant::now();
    let sol = fixed_point_solve(&config, &kernel, None).unwrap();
    println!(
        "eps 0.01 cold: iters {} (lin {}), res {:.2e}, converged {} ({:?})",
        sol.iterations, sol.linear_iterations, sol.residual_fp, sol.flags.converged,
        t0.elapsed()
    );
}

#[test]
#[ignore]
fn probe_oleinik_scheme() {
    // Pure Burgers from sign(x): isolates the scheme's intrinsic one-sided
    // slope excess (sonic-point kink) from the fractal term's effect.
    for (h, n) in [(0.01, 2000usize), (0.005, 4000usize)] {
        let grid = GridSpec::new(h, n).unwrap();
        let kernel = FractionalKernel::build(grid, 0.5).unwrap();
        let u0 = OddField::from_fn(grid, 1.0, |_| 1.0).mirror();
        for fractal in [false, true] {
            let mut config = EvolutionConfig::new(0.0, 0.5, 0.5).unwrap();
            config.record_times = vec![0.05, 0.1, 0.25];
            config.fractal_enabled = fractal;
            let traj = evolve(u0.clone(), &config, &kernel).unwrap();
            println!("h {h}: fractal {fractal}");
            for state in &traj.states {
                if state.t <= 0.0 {
                    continue;
                }
                let rep = oleinik_max_slope(&state.u, state.t).unwrap();
                // locate the max forward slope
                let vals = state.u.values();
                let mut arg = 0;
                let mut best = f64::NEG_INFINITY;
                for i in 0..vals.len() - 1 {
                    let s = (vals[i + 1] - vals[i]) / h;
                    if s > best {
                        best = s;
                        arg = i;
                    }
                }
                let x = state.u.grid().full_center(arg);
                println!(
                    "  t {:5.2}: slope {:8.4}  slope*t {:6.3}  excess*t {:+7.3}  at x {:+.4}",
                    state.t,
                    rep.max_slope,
                    rep.max_slope * state.t,
                    (rep.max_slope - 1.0 / state.t) * state.t,
                    x
                );
            }
        }
    }
}

#[test]
#[ignore]
fn probe_sonic_saturation() {
    // How large does slope*t get for the pure-Burgers sonic kink as h -> 0
    // and t grows?  Calibrates the slope-monitor slack constant.
    for (h, n) in [(0.01, 2000usize), (0.005, 4000), (0.0025, 8000)] {
        let grid = GridSpec::new(h, n).unwrap();
        let kernel = FractionalKernel::build(grid, 0.5).unwrap();
        let u0 = OddField::from_fn(grid, 1.0, |_| 1.0).mirror();
        let mut config = EvolutionConfig::new(0.0, 0.5, 2.0).unwrap();
        config.record_times = vec![0.5, 1.0];
        config.fractal_enabled = false;
        let traj = evolve(u0.clone(), &config, &kernel).unwrap();
        let mut worst: f64 = 0.0;
        for state in &traj.states {
            if state.t <= 0.0 {
                continue;
            }
            let rep = oleinik_max_slope(&state.u, state.t).unwrap();
            worst = worst.max(rep.max_slope * state.t);
        }
        println!("h {h}: worst slope*t over checkpoints = {worst:.4}");
    }
    // CFL dependence at fixed h: the kink is a local cell-pair structure,
    // check it does not blow up for smaller dt.
    for cfl in [0.25, 0.5, 0.9] {
        let grid = GridSpec::new(0.01, 2000).unwrap();
        let kernel = FractionalKernel::build(grid, 0.5).unwrap();
        let u0 = OddField::from_fn(grid, 1.0, |_| 1.0).mirror();
        let mut config = EvolutionConfig::new(0.0, cfl, 1.0).unwrap();
        config.fractal_enabled = false;
        let traj = evolve(u0.clone(), &config, &kernel).unwrap();
        let rep = oleinik_max_slope(&traj.final_state().u, traj.final_state().t).unwrap();
        println!("cfl {cfl}: slope*t at t=1 is {:.4}", rep.max_slope);
    }
}

#[test]
#[ignore]
fn probe_spectral_agreement() {
    // Quadrature vs spectral on Gaussians: how much of the disagreement
    // is the spectral route's periodization (DC mode + wrap-around)?
    use fracburgers::{apply_spectral, Extension, FullField};
    let h = 0.03125;
    let n = 1024usize;
    let grid = GridSpec::new(h, n).unwrap();
    let kernel = FractionalKernel::build(grid, 0.5).unwrap();
    for width in [0.5, 1.0, 2.0] {
        let f = FullField::from_fn(grid, |x| (-(x * x) / (width * width)).exp());
        let quad = kernel.apply_full(&f, Extension::Zero, ApplyPath::Fft).unwrap();
        // same-domain spectral
        let spec = apply_spectral(&f, 0.5).unwrap();
        // padded spectral: same h, 4x half-length, restricted back
        let pad_grid = GridSpec::new(h, 4 * n).unwrap();
        let f_pad = FullField::from_fn(pad_grid, |x| (-(x * x) / (width * width)).exp());
        let spec_pad = apply_spectral(&f_pad, 0.5).unwrap();
        let offset = pad_grid.n() - grid.n(); // first cell of the original window
        let rel = |a: &[f64], b: &[f64], off: usize| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, x) in a.iter().enumerate() {
                let y = b[i + off];
                num += (x - y) * (x - y);
                den += y * y;
            }
            (num / den).sqrt()
        };
        let r_same = rel(quad.values(), spec.field.values(), 0);
        let r_pad = rel(quad.values(), spec_pad.field.values(), offset);
        println!("width {width}: same-domain {r_same:.4e}  padded-ref {r_pad:.4e}");
    }
    // refinement behavior of the padded comparison
    for (hh, nn) in [(0.03125, 1024usize), (0.015625, 2048)] {
        let grid = GridSpec::new(hh, nn).unwrap();
        let kernel = FractionalKernel::build(grid, 0.5).unwrap();
        let f = FullField::from_fn(grid, |x| (-(x * x)).exp());
        let quad = kernel.apply_full(&f, Extension::Zero, ApplyPath::Fft).unwrap();
        let pad_grid = GridSpec::new(hh, 4 * nn).unwrap();
        let f_pad = FullField::from_fn(pad_grid, |x| (-(x * x)).exp());
        let spec_pad = apply_spectral(&f_pad, 0.5).unwrap();
        let offset = pad_grid.n() - grid.n();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, x) in quad.values().iter().enumerate() {
            let y = spec_pad.field.values()[i + offset];
            num += (x - y) * (x - y);
            den += y * y;
        }
        println!("h {hh}: padded rel {:.4e}", (num / den).sqrt());
    }
}

#[test]
#[ignore]
fn probe_spectral_agreement_matrix() {
    use fracburgers::{apply_spectral, Extension, FullField};
    for lambda in [0.5, 0.999] {
        for (hh, nn) in [(0.03125, 1024usize), (0.015625, 2048)] {
            let grid = GridSpec::new(hh, nn).unwrap();
            let kernel = FractionalKernel::build(grid, lambda).unwrap();
            for width in [0.5, 1.0, 2.0] {
                let f = FullField::from_fn(grid, |x| (-(x * x) / (width * width)).exp());
                let quad = kernel.apply_full(&f, Extension::Zero, ApplyPath::Fft).unwrap();
                let mut line = format!("lambda {lambda} h {hh} width {width}:");
                for pad in [16usize, 32] {
                    let pad_grid = GridSpec::new(hh, pad * nn).unwrap();
                    let f_pad =
                        FullField::from_fn(pad_grid, |x| (-(x * x) / (width * width)).exp());
                    let spec_pad = apply_spectral(&f_pad, lambda).unwrap();
                    let offset = pad_grid.n() - grid.n();
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for (i, x) in quad.values().iter().enumerate() {
                        let y = spec_pad.field.values()[i + offset];
                        num += (x - y) * (x - y);
                        den += y * y;
                    }
                    line += &format!("  pad{pad} {:.4e}", (num / den).sqrt());
                }
                println!("{line}");
            }
        }
    }
}

#[test]
#[ignore]
fn probe_spectral_agreement_profile() {
    use fracburgers::{apply_spectral, Extension, FullField};
    let h = 0.03125;
    let n = 1024usize;
    let grid = GridSpec::new(h, n).unwrap();
    let kernel = FractionalKernel::build(grid, 0.5).unwrap();
    let width = 2.0;
    let f = FullField::from_fn(grid, |x| (-(x * x) / (width * width)).exp());
    let quad = kernel.apply_full(&f, Extension::Zero, ApplyPath::Fft).unwrap();
    let pad = 32usize;
    let pad_grid = GridSpec::new(h, pad * n).unwrap();
    let f_pad = FullField::from_fn(pad_grid, |x| (-(x * x) / (width * width)).exp());
    let spec_pad = apply_spectral(&f_pad, 0.5).unwrap();
    let offset = pad_grid.n() - grid.n();
    let mut worst = (0usize, 0.0f64);
    for (i, x) in quad.values().iter().enumerate() {
        let d = (x - spec_pad.field.values()[i + offset]).abs();
        if d > worst.1 {
            worst = (i, d);
        }
    }
    println!("worst diff {:.3e} at x = {:+.4}", worst.1, grid.full_center(worst.0));
    for i in [0usize, 256, 512, 768, 1023, 1024, 1280, 1536, 1792, 2047] {
        let x = grid.full_center(i);
        let q = quad.values()[i];
        let r = spec_pad.field.values()[i + offset];
        println!("x {x:+8.4}: quad {q:+.6e}  ref {r:+.6e}  diff {:+.3e}", q - r);
    }
    // windowed rel l2 over |x| <= 16 and over |x| <= 28
    for cut in [16.0, 28.0] {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, x) in quad.values().iter().enumerate() {
            if grid.full_center(i).abs() <= cut {
                let y = spec_pad.field.values()[i + offset];
                num += (x - y) * (x - y);
                den += y * y;
            }
        }
        println!("rel l2 over |x|<={cut}: {:.4e}", (num / den).sqrt());
    }
}

#[test]
#[ignore]
fn probe_spectral_agreement_windowed() {
    use fracburgers::{apply_spectral, Extension, FullField};
    for lambda in [0.5, 0.999] {
        for (hh, nn) in [(0.03125, 1024usize), (0.015625, 2048)] {
            let grid = GridSpec::new(hh, nn).unwrap();
            let kernel = FractionalKernel::build(grid, lambda).unwrap();
            let cut = grid.length() / 2.0;
            let mut worst: f64 = 0.0;
            let mut line = format!("lambda {lambda} h {hh}:");
            for width in [0.5, 1.0, 2.0] {
                let f = FullField::from_fn(grid, |x| (-(x * x) / (width * width)).exp());
                let quad = kernel.apply_full(&f, Extension::Zero, ApplyPath::Fft).unwrap();
                let pad_grid = GridSpec::new(hh, 16 * nn).unwrap();
                let f_pad =
                    FullField::from_fn(pad_grid, |x| (-(x * x) / (width * width)).exp());
                let spec_pad = apply_spectral(&f_pad, lambda).unwrap();
                let offset = pad_grid.n() - grid.n();
                let mut num = 0.0;
                let mut den = 0.0;
                for (i, x) in quad.values().iter().enumerate() {
                    if grid.full_center(i).abs() <= cut {
                        let y = spec_pad.field.values()[i + offset];
                        num += (x - y) * (x - y);
                        den += y * y;
                    }
                }
                let rel = (num / den).sqrt();
                worst = worst.max(rel);
                line += &format!("  w{width} {rel:.4e}");
            }
            println!("{line}  worst {worst:.4e}");
        }
    }
}
