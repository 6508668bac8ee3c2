//! Admissibility diagnostics: weak-form residuals against analytic test
//! functions, one-sided slope (Oleinik) verdicts, operator-norm and decay
//! estimates, and the certificate that bundles them into a nonuniqueness
//! verdict.
//!
//! The residual routines deliberately evaluate the nonlocal term with a
//! refined reference quadrature rather than the production kernel, so that
//! a residual measures the quality of the *field*, not of the operator
//! discretization it was produced with.

use crate::constants::{DELTA_SEP, TOL_GAMMA, TOL_WEAK_ZERO};
use crate::error::{Error, Result};
use crate::evolution::{oleinik_max_slope, AuditReport, OleinikReport, Trajectory};
use crate::grid::{FullField, GridSpec, OddField};
use crate::kernel::{ApplyPath, Extension, FractionalKernel};
use crate::quad::gauss_legendre;

/// Refinement ratio of the reference grid.  An odd ratio keeps every
/// production cell center a cell center of the fine grid (fine index
/// 11 j + 5), so reference values need no interpolation.
const REFERENCE_RATIO: usize = 11;

/// Parity of an analytic test function, with the one-sided limit at the
/// origin for the odd members (the even ones have a well-defined value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parity {
    Odd,
    Even,
    Generic,
}

/// Analytic test function with its derivative, used for weak-form
/// pairings.  `origin_limit` is the limit from the right at x = 0.
pub struct TestFunction {
    pub name: String,
    pub parity: Parity,
    pub origin_limit: f64,
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        parity: Parity,
        origin_limit: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            name: name.into(),
            parity,
            origin_limit,
            eval: Box::new(eval),
            deriv: Box::new(deriv),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

/// Smooth even bump supported on (-1, 1): exp(1 - 1/(1 - s^2)), value 1
/// at s = 0.
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_deriv(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - s * s;
        bump(s) * (-2.0 * s) / (d * d)
    }
}

/// Odd test functions with a unit jump at the origin: sign(x) b(x/R) for
/// support radii R in {2, 4, 8}.  Each is smooth away from x = 0 with
/// one-sided limit 1.
pub fn jump_battery() -> Vec<TestFunction> {
    [2.0f64, 4.0, 8.0]
        .iter()
        .map(|&r| {
            TestFunction::new(
                format!("jump_bump_r{r}"),
                Parity::Odd,
                1.0,
                move |x: f64| x.signum() * bump(x / r),
                // sign(x) b(x/R) has even derivative b'(|x|/R)/R.
                move |x: f64| bump_deriv(x.abs() / r) / r,
            )
        })
        .collect()
}

/// Smooth odd test functions vanishing at the origin; weak residuals of a
/// genuine weak solution against these must be zero.
pub fn trace_free_battery() -> Vec<TestFunction> {
    vec![
        TestFunction::new(
            "odd_gaussian_w1",
            Parity::Odd,
            0.0,
            |x: f64| x * (-x * x).exp(),
            |x: f64| (1.0 - 2.0 * x * x) * (-x * x).exp(),
        ),
        TestFunction::new(
            "odd_gaussian_w2",
            Parity::Odd,
            0.0,
            |x: f64| x * (-x * x / 4.0).exp(),
            |x: f64| (1.0 - x * x / 2.0) * (-x * x / 4.0).exp(),
        ),
    ]
}

/// Globally smooth H1 test functions (no origin structure) for residuals
/// of the viscous stationary equation.
pub fn smooth_battery() -> Vec<TestFunction> {
    vec![
        TestFunction::new(
            "gaussian",
            Parity::Even,
            1.0,
            |x: f64| (-x * x).exp(),
            |x: f64| -2.0 * x * (-x * x).exp(),
        ),
        TestFunction::new(
            "odd_gaussian",
            Parity::Odd,
            0.0,
            |x: f64| x * (-x * x).exp(),
            |x: f64| (1.0 - 2.0 * x * x) * (-x * x).exp(),
        ),
        TestFunction::new(
            "shifted_gaussian",
            Parity::Generic,
            (-1.0f64).exp(),
            |x: f64| (-(x - 1.0) * (x - 1.0)).exp(),
            |x: f64| -2.0 * (x - 1.0) * (-(x - 1.0) * (x - 1.0)).exp(),
        ),
        TestFunction::new(
            "modulated_gaussian",
            Parity::Odd,
            0.0,
            |x: f64| (2.0 * x).sin() * (-x * x / 2.0).exp(),
            |x: f64| (2.0 * (2.0 * x).cos() - x * (2.0 * x).sin()) * (-x * x / 2.0).exp(),
        ),
        TestFunction::new(
            "quadratic_gaussian",
            Parity::Even,
            0.0,
            |x: f64| x * x * (-x * x).exp(),
            |x: f64| (2.0 * x - 2.0 * x * x * x) * (-x * x).exp(),
        ),
    ]
}

/// Odd piecewise-linear hat of width w and unit one-sided trace:
/// sign(x) (1 - |x|/w)^+.  Lipschitz but not smooth; useful as the
/// window that extracts the quadratic trace.
pub fn window_function(w: f64) -> TestFunction {
    TestFunction::new(
        format!("window_w{w}"),
        Parity::Odd,
        1.0,
        move |x: f64| x.signum() * (1.0 - x.abs() / w).max(0.0),
        move |x: f64| if x != 0.0 && x.abs() < w { -1.0 / w } else { 0.0 },
    )
}

/// Nonlocal operator evaluated on a refined copy of a production grid.
///
/// Test functions are sampled on a grid `REFERENCE_RATIO` times finer
/// (same length) and the refined kernel output is read back at the
/// production cell centers, which the odd ratio keeps exactly aligned.
/// Quadrature error near the kernel split shrinks accordingly, so the
/// output serves as a near-exact evaluation for fields that vanish
/// towards the domain ends.
pub struct ReferenceOperator {
    production: GridSpec,
    fine: GridSpec,
    kernel: FractionalKernel,
}

impl ReferenceOperator {
    pub fn new(production: GridSpec, lambda: f64) -> Result<Self> {
        let fine = GridSpec::new(production.h() / REFERENCE_RATIO as f64, REFERENCE_RATIO * production.n())?;
        let kernel = FractionalKernel::build(fine, lambda)?;
        Ok(ReferenceOperator { production, fine, kernel })
    }

    pub fn production_grid(&self) -> GridSpec {
        self.production
    }

    pub fn lambda(&self) -> f64 {
        self.kernel.lambda()
    }

    /// Apply the operator to an analytic function, returning values at
    /// the production cell centers (full line).
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<FullField> {
        let sampled = FullField::from_fn(self.fine, f);
        let out = self.kernel.apply_full(&sampled, Extension::Zero, ApplyPath::Fft)?;
        let fine_vals = out.values();
        let n2 = 2 * self.production.n();
        let vals: Vec<f64> = (0..n2)
            .map(|j| fine_vals[REFERENCE_RATIO * j + REFERENCE_RATIO / 2])
            .collect();
        FullField::new(self.production, vals)
    }
}

/// Piecewise-linear segment of the interpolant behind an odd field's
/// broken gradient: the graph runs through the pinned one-sided trace at
/// 0, the cell centers, and zero at the two domain ends.
struct Segment {
    mid: f64,
    slope: f64,
    len: f64,
}

fn gradient_segments(v: &OddField) -> Vec<Segment> {
    let g = v.grid();
    let (h, n, l) = (g.h(), g.n(), g.length());
    let vals = v.values();
    let mut segs = Vec::with_capacity(2 * (n + 1));
    let mut push_mirrored = |mid: f64, slope: f64, len: f64| {
        segs.push(Segment { mid, slope, len });
        // The interpolant is odd, so its derivative is even.
        segs.push(Segment { mid: -mid, slope, len });
    };
    push_mirrored(0.25 * h, (vals[0] - v.trace_plus()) / (0.5 * h), 0.5 * h);
    for i in 0..n - 1 {
        push_mirrored((i + 1) as f64 * h, (vals[i + 1] - vals[i]) / h, h);
    }
    push_mirrored(l - 0.25 * h, -vals[n - 1] / (0.5 * h), 0.5 * h);
    segs
}

fn check_production_grid(v: &OddField, reference: &ReferenceOperator) -> Result<()> {
    if v.grid() != reference.production_grid() {
        return Err(Error::Grid("field grid does not match the reference operator".into()));
    }
    Ok(())
}

/// Weak residual of the inviscid stationary equation against a test
/// function, with the nonlocal term through the reference operator:
///     R(v, phi) = int_{x != 0} [ v L(phi) - (v^2/2) phi' ] dx.
/// For a genuine stationary weak solution this equals the quadratic
/// trace of v at the origin times phi(0+); it vanishes for trace-free
/// odd phi and for even phi.
pub fn weak_residual(v: &OddField, phi: &TestFunction, reference: &ReferenceOperator) -> Result<f64> {
    check_production_grid(v, reference)?;
    let g = v.grid();
    let h = g.h();
    let lphi = reference.apply_fn(|x| phi.eval(x))?;
    let vm = v.mirror();
    let mut acc = 0.0;
    for j in 0..2 * g.n() {
        let x = g.full_center(j);
        let u = vm.values()[j];
        acc += u * lphi.values()[j] - 0.5 * u * u * phi.deriv(x);
    }
    Ok(acc * h)
}

/// Weak residual of the viscous stationary equation at viscosity eps:
/// the inviscid residual plus eps times the H1 pairing
///     int v phi + int_{x != 0} v' phi',
/// where v' is the broken gradient of the interpolant pinned at the
/// trace.  Vanishes (to discretization error) on solved profiles when
/// phi is globally H1; reduces to a one-sided boundary flux bounded
/// below by 1 when phi carries a unit jump at the origin.
pub fn weak_residual_regularized(
    v: &OddField,
    epsilon: f64,
    phi: &TestFunction,
    reference: &ReferenceOperator,
) -> Result<f64> {
    if epsilon < 0.0 {
        return Err(Error::Config(format!("negative viscosity {epsilon}")));
    }
    let base = weak_residual(v, phi, reference)?;
    let g = v.grid();
    let h = g.h();
    let vm = v.mirror();
    let mut mass = 0.0;
    for j in 0..2 * g.n() {
        mass += vm.values()[j] * phi.eval(g.full_center(j));
    }
    mass *= h;
    let grad: f64 = gradient_segments(v)
        .iter()
        .map(|s| s.slope * phi.deriv(s.mid) * s.len)
        .sum();
    Ok(base + epsilon * (mass + grad))
}

/// Richardson ladder for the mean of v^2 over shrinking origin windows
/// (8h, 4h, 2h); the extrapolant estimates the one-sided quadratic trace.
#[derive(Debug, Clone)]
pub struct TraceSquareEstimate {
    /// Window widths actually used, widest first.
    pub windows: [f64; 3],
    /// Window means of v^2, same order.
    pub raw: [f64; 3],
    /// Linear Richardson extrapolant from the two finest windows.
    pub extrapolated: f64,
    /// Set when the ladder is not monotone beyond roundoff, in which
    /// case the extrapolant should not be trusted.
    pub low_confidence: bool,
}

pub fn origin_mean_square(v: &OddField) -> Result<TraceSquareEstimate> {
    let g = v.grid();
    if g.n() < 8 {
        return Err(Error::Grid("origin window ladder needs at least 8 cells".into()));
    }
    let h = g.h();
    let squared = OddField::new(
        g,
        v.values().iter().map(|x| x * x).collect(),
        v.trace_plus() * v.trace_plus(),
    )?;
    let windows = [8.0 * h, 4.0 * h, 2.0 * h];
    let mut raw = [0.0; 3];
    for (k, w) in windows.iter().enumerate() {
        raw[k] = squared.trace_avg(*w)?;
    }
    let extrapolated = 2.0 * raw[2] - raw[1];
    let d1 = raw[1] - raw[0];
    let d2 = raw[2] - raw[1];
    let scale = raw.iter().fold(1.0f64, |m, r| m.max(r.abs()));
    let low_confidence = d1 * d2 < 0.0 && d1.abs().max(d2.abs()) > 1e-12 * scale;
    Ok(TraceSquareEstimate { windows, raw, extrapolated, low_confidence })
}

/// One-sided slope verdict at the origin interface.  The mirrored jump
/// from -trace to +trace over one cell gives the forward difference
/// quotient 2 trace / h; a positive jump of near-unit trace certifies
/// that every Oleinik-type one-sided bound fails at the origin.
#[derive(Debug, Clone, Copy)]
pub struct OleinikViolation {
    pub trace_plus: f64,
    pub forward_slope: f64,
    pub verdict: bool,
}

pub fn oleinik_violation(v: &OddField) -> OleinikViolation {
    let trace = v.trace_plus();
    OleinikViolation {
        trace_plus: trace,
        forward_slope: 2.0 * trace / v.grid().h(),
        verdict: trace >= 1.0 - TOL_GAMMA,
    }
}

/// One row of the split-radius operator bound: the l1 norm of the
/// applied operator against (2 G r^(1-lambda)/(1-lambda)) |f|_BV
///                        + (4 G / (lambda r^lambda)) ||f||_l1.
#[derive(Debug, Clone, Copy)]
pub struct OperatorBoundRow {
    pub radius: f64,
    pub operator_l1: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Check the split-radius l1 bound of the operator for a list of split
/// radii.  The bound is a true inequality of the continuum operator;
/// the discrete margins stay nonnegative because the lag weights are
/// exact cell integrals of the kernel.
pub fn l1_operator_bound_check(
    f: &FullField,
    kernel: &FractionalKernel,
    radii: &[f64],
) -> Result<Vec<OperatorBoundRow>> {
    if f.grid() != kernel.grid() {
        return Err(Error::Grid("field grid does not match the kernel".into()));
    }
    let h = f.grid().h();
    let out = kernel.apply_full(f, Extension::Zero, ApplyPath::Fft)?;
    let operator_l1 = out.values().iter().map(|x| x.abs()).sum::<f64>() * h;
    let l1 = f.values().iter().map(|x| x.abs()).sum::<f64>() * h;
    // Total variation of the zero-extended field, boundary jumps included.
    let vals = f.values();
    let mut bv = vals[0].abs() + vals[vals.len() - 1].abs();
    bv += vals.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>();
    let g = kernel.g_const();
    let lambda = kernel.lambda();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if r <= 0.0 {
            return Err(Error::Config(format!("split radius {r} must be positive")));
        }
        let bound = 2.0 * g * r.powf(1.0 - lambda) / (1.0 - lambda) * bv
            + 4.0 * g / (lambda * r.powf(lambda)) * l1;
        rows.push(OperatorBoundRow { radius: r, operator_l1, bound, margin: bound - operator_l1 });
    }
    Ok(rows)
}

/// One row of the exterior l2 bound: the operator norm outside |x| > R
/// against gradient mass outside |x| > R - r plus the global l2 norm.
#[derive(Debug, Clone, Copy)]
pub struct ExteriorBoundRow {
    pub split_radius: f64,
    pub exterior_radius: f64,
    pub operator_l2: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Exterior l2 bound of the applied operator: for each pair (r, R) with
/// r < R,
///   || L v ||_{l2(|x|>R)} <= (2 G r^(1-lambda)/(1-lambda)) ||v'||_{l2(|x|>R-r)}
///                          + (4 G / (lambda r^lambda)) ||v||_{l2}.
pub fn exterior_l2_bound_check(
    v: &OddField,
    kernel: &FractionalKernel,
    pairs: &[(f64, f64)],
) -> Result<Vec<ExteriorBoundRow>> {
    if v.grid() != kernel.grid() {
        return Err(Error::Grid("field grid does not match the kernel".into()));
    }
    let g = v.grid();
    let h = g.h();
    let lv = kernel.apply_odd(v, ApplyPath::Fft)?;
    let segs = gradient_segments(v);
    let gc = kernel.g_const();
    let lambda = kernel.lambda();
    let l2_global = v.norms().l2;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(r, cap_r) in pairs {
        if r <= 0.0 || cap_r <= r {
            return Err(Error::Config(format!("need 0 < r < R, got r = {r}, R = {cap_r}")));
        }
        if cap_r - r < 0.5 * h {
            return Err(Error::Config(format!(
                "R - r = {} does not clear the trace segment (h/2 = {})",
                cap_r - r,
                0.5 * h
            )));
        }
        let mut op_sq = 0.0;
        for (i, y) in lv.values().iter().enumerate() {
            if g.center(i) > cap_r {
                op_sq += y * y;
            }
        }
        let operator_l2 = (2.0 * op_sq * h).sqrt();
        let grad_sq: f64 = segs
            .iter()
            .filter(|s| s.mid.abs() > cap_r - r)
            .map(|s| s.slope * s.slope * s.len)
            .sum();
        let bound = 2.0 * gc * r.powf(1.0 - lambda) / (1.0 - lambda) * grad_sq.sqrt()
            + 4.0 * gc / (lambda * r.powf(lambda)) * l2_global;
        rows.push(ExteriorBoundRow {
            split_radius: r,
            exterior_radius: cap_r,
            operator_l2,
            bound,
            margin: bound - operator_l2,
        });
    }
    Ok(rows)
}

/// Sharp constant of the translation-continuity bound:
/// c(lambda) = max over sigma > 0 of 4 sin^2(pi sigma) / sigma^lambda,
/// located by golden-section search (the objective is unimodal on (0, 1)
/// and decays outside).
pub fn translation_constant(lambda: f64) -> Result<f64> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::Config(format!("lambda = {lambda} outside (0, 1)")));
    }
    let f = |s: f64| 4.0 * (std::f64::consts::PI * s).sin().powi(2) / s.powf(lambda);
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok(fc.max(fd))
}

#[derive(Debug, Clone, Copy)]
pub struct TranslationRow {
    pub shift: f64,
    pub shifted_l2_sq: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct TranslationReport {
    pub c_lambda: f64,
    pub rows: Vec<TranslationRow>,
}

/// Translation continuity in l2 controlled by the energy form: for a
/// shift s = m h,
///   || v(. - s) - v ||^2_{l2(R)} <= c(lambda) s^lambda a(v, v),
/// with both sides on the mirrored, zero-extended line.
pub fn translation_continuity_check(
    v: &OddField,
    kernel: &FractionalKernel,
    shifts_cells: &[usize],
) -> Result<TranslationReport> {
    if v.grid() != kernel.grid() {
        return Err(Error::Grid("field grid does not match the kernel".into()));
    }
    let h = v.grid().h();
    let n = v.grid().n() as isize;
    let c_lambda = translation_constant(kernel.lambda())?;
    let energy = kernel.quadratic(v)?;
    let mut rows = Vec::with_capacity(shifts_cells.len());
    for &m in shifts_cells {
        if m == 0 {
            return Err(Error::Config("zero shift is trivial; use m >= 1".into()));
        }
        let m = m as isize;
        let mut acc = 0.0;
        for k in -(n + m)..(n + m) {
            let d = v.at_signed(k + m) - v.at_signed(k);
            acc += d * d;
        }
        let shifted_l2_sq = acc * h;
        let s = m as f64 * h;
        let bound = c_lambda * s.powf(kernel.lambda()) * energy;
        rows.push(TranslationRow { shift: s, shifted_l2_sq, bound, margin: bound - shifted_l2_sq });
    }
    Ok(TranslationReport { c_lambda, rows })
}

/// Fixed evaluation geometry of the barrier decay check.
const BARRIER_H: f64 = 0.05;
const BARRIER_HALF_CELLS: usize = 8000;
/// Report window and power-law fit window.
const BARRIER_REPORT_RADIUS: f64 = 50.0;
const BARRIER_FIT_INNER: f64 = 10.0;
/// The far completion integrates the analytic barrier out to this radius
/// before switching to the closed-form power-law remainder.
const BARRIER_FAR_CUTOFF: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub lambda: f64,
    pub lambda_prime: f64,
    /// Sup of |L Phi| over the report window |x| <= 50.
    pub sup_norm: f64,
    /// Log-log slope of |L Phi| on [10, 50]; the barrier calculus gives
    /// lambda' - lambda for large x.
    pub fitted_exponent: f64,
    /// Smallest C with |L Phi(x)| <= C (|x|^-lambda + |x|^(lambda'-lambda))
    /// over 1 <= |x| <= 50.
    pub bound_constant: f64,
    /// Max |L Phi(x) - L Phi(-x)| over the report window; the barrier is
    /// even, so this is pure numerics.
    pub symmetry_defect: f64,
    /// (x, computed, reference) rows for externally tabulated samples.
    pub reference_rows: Vec<(f64, f64, f64)>,
}

/// Far completion of the barrier evaluation.  The discrete kernel reads
/// the field as zero both beyond the grid ends (|y| > L) and beyond one
/// lag length from the evaluation point (|y - x| > L); for x >= 0 the
/// union of the two regions is {y > L} plus {y < x - L}, so the dropped
/// mass is
///     -G [ int_L^inf Phi(y) (y - x)^(-1-lambda) dy
///        + int_L^inf Phi(u - x) u^(-1-lambda) du ].
/// Geometric Gauss panels carry both integrals to BARRIER_FAR_CUTOFF;
/// beyond that the integrands are clean power laws with closed form.
/// The whole construction is even in x; call with |x|.
fn barrier_completion(
    x: f64,
    l: f64,
    g: f64,
    lambda: f64,
    lambda_prime: f64,
    rule: &[(f64, f64)],
) -> f64 {
    debug_assert!(x >= 0.0 && x < l);
    let phi = |y: f64| (1.0 + y * y).powf(0.5 * lambda_prime);
    let integrand =
        |t: f64| phi(t) * (t - x).powf(-1.0 - lambda) + phi(t - x) * t.powf(-1.0 - lambda);
    let mut acc = 0.0;
    let mut a = l;
    while a < BARRIER_FAR_CUTOFF {
        let b = (2.0 * a).min(BARRIER_FAR_CUTOFF);
        let (c0, c1) = (0.5 * (b - a), 0.5 * (b + a));
        for &(node, weight) in rule {
            acc += weight * c0 * integrand(c0 * node + c1);
        }
        a = b;
    }
    // Remainder beyond the cutoff: both integrands ~ t^(lambda'-1-lambda)
    // to relative accuracy x / cutoff.
    acc += 2.0 * BARRIER_FAR_CUTOFF.powf(lambda_prime - lambda) / (lambda - lambda_prime);
    -g * acc
}

/// Evaluate the operator on the polynomial barrier (1 + x^2)^(lambda'/2)
/// over a large fixed grid, completing the truncated far field
/// analytically, and report sup norm, power-law decay, and agreement
/// with tabulated reference values (pass an empty slice to skip).
pub fn barrier_decay_check(
    lambda: f64,
    lambda_prime: f64,
    reference: &[(f64, f64)],
) -> Result<BarrierReport> {
    let grid = GridSpec::new(BARRIER_H, BARRIER_HALF_CELLS)?;
    barrier_decay_check_on(grid, lambda, lambda_prime, reference)
}

/// Grid-parametric body of `barrier_decay_check`, also used by cheaper
/// tests; the grid must comfortably contain the report window.
pub fn barrier_decay_check_on(
    grid: GridSpec,
    lambda: f64,
    lambda_prime: f64,
    reference: &[(f64, f64)],
) -> Result<BarrierReport> {
    if !(0.0..1.0).contains(&lambda_prime) || lambda_prime >= lambda {
        return Err(Error::Config(format!(
            "barrier exponent {lambda_prime} must sit in [0, lambda = {lambda})"
        )));
    }
    let report_radius = BARRIER_REPORT_RADIUS.min(0.5 * grid.length());
    let kernel = FractionalKernel::build(grid, lambda)?;
    let phi = FullField::from_fn(grid, |x| (1.0 + x * x).powf(0.5 * lambda_prime));
    let base = kernel.apply_full(&phi, Extension::Zero, ApplyPath::Fft)?;
    let rule = gauss_legendre(16);
    let g = kernel.g_const();
    let l = grid.length();
    let n2 = 2 * grid.n();
    // Completed values on the report window, indexed by full cell.
    let mut completed = vec![f64::NAN; n2];
    for j in 0..n2 {
        let x = grid.full_center(j);
        if x.abs() <= report_radius + grid.h() {
            completed[j] =
                base.values()[j] + barrier_completion(x.abs(), l, g, lambda, lambda_prime, &rule);
        }
    }
    let mut sup_norm = 0.0f64;
    let mut bound_constant = 0.0f64;
    let mut symmetry_defect = 0.0f64;
    let mut fit_pts: Vec<(f64, f64)> = Vec::new();
    for j in 0..n2 {
        let x = grid.full_center(j);
        if x.abs() > report_radius {
            continue;
        }
        let val = completed[j];
        sup_norm = sup_norm.max(val.abs());
        if x.abs() >= 1.0 {
            let envelope = x.abs().powf(-lambda) + x.abs().powf(lambda_prime - lambda);
            bound_constant = bound_constant.max(val.abs() / envelope);
        }
        if x > 0.0 {
            let mirrored = completed[n2 - 1 - j];
            symmetry_defect = symmetry_defect.max((val - mirrored).abs());
            if (BARRIER_FIT_INNER..=report_radius).contains(&x) && val.abs() > 0.0 {
                fit_pts.push((x.ln(), val.abs().ln()));
            }
        }
    }
    let fitted_exponent = least_squares_slope(&fit_pts);
    // Tabulated samples sit between cell centers; linear interpolation
    // is second order, well below the kernel quadrature error.
    let value_at = |x: f64| -> Result<f64> {
        let pos = (l + x) / grid.h() - 0.5;
        let j0 = pos.floor() as usize;
        let t = pos - j0 as f64;
        let (a, b) = (completed[j0], completed[j0 + 1]);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("reference sample x = {x} outside report window")));
        }
        Ok((1.0 - t) * a + t * b)
    };
    let mut reference_rows = Vec::with_capacity(reference.len());
    for &(x, expected) in reference {
        reference_rows.push((x, value_at(x)?, expected));
    }
    Ok(BarrierReport {
        lambda,
        lambda_prime,
        sup_norm,
        fitted_exponent,
        bound_constant,
        symmetry_defect,
        reference_rows,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Tolerances of the nonuniqueness certificate.  Every comparison is a
/// one-sided threshold, so tightening any of them can only turn a pass
/// into a withheld verdict, never the reverse.
#[derive(Debug, Clone, Copy)]
pub struct CertificateTolerances {
    /// Jump-battery weak residuals must reach 1 minus this.
    pub jump_band: f64,
    /// Trace-free battery weak residuals must stay within this of zero.
    pub trace_free_band: f64,
    /// Terminal l1 separation on [-1, 1] must reach this.
    pub separation_min: f64,
}

impl Default for CertificateTolerances {
    fn default() -> Self {
        CertificateTolerances {
            jump_band: TOL_GAMMA,
            trace_free_band: TOL_WEAK_ZERO,
            separation_min: DELTA_SEP,
        }
    }
}

/// Aggregated admissibility evidence for a stationary candidate and the
/// entropy trajectory launched from the same data.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub trace_square: TraceSquareEstimate,
    pub oleinik: OleinikViolation,
    /// (test function name, residual) for the unit-jump battery.
    pub jump_residuals: Vec<(String, f64)>,
    /// (test function name, residual) for the trace-free battery.
    pub trace_free_residuals: Vec<(String, f64)>,
    /// (time, one-sided slope report) for every recorded time t > 0.
    pub trajectory_slopes: Vec<(f64, OleinikReport)>,
    /// l1 distance on [-1, 1] between the terminal state and the
    /// stationary candidate.
    pub separation: f64,
    /// Worst entropy-audit residual, when an audit was supplied.
    pub audit_worst: Option<f64>,
    /// Names of every failed component; empty iff the verdict holds.
    pub failing: Vec<String>,
    /// True iff the evidence certifies two distinct weak solutions.
    pub verdict: bool,
}

/// Assemble the nonuniqueness certificate.  The verdict requires all of:
/// (a) unit-jump weak residuals at least 1 - jump_band and trace-free
/// residuals within trace_free_band of zero, (b) a near-unit positive
/// jump at the origin of the stationary candidate, (c) the evolved
/// trajectory satisfying the one-sided Oleinik bound at every recorded
/// positive time, and (d) terminal l1 separation on [-1, 1] of at least
/// separation_min.  Every failed component is named in `failing`.
pub fn nonuniqueness_certificate(
    v: &OddField,
    trajectory: &Trajectory,
    reference: &ReferenceOperator,
    audit: Option<&AuditReport>,
    tol: CertificateTolerances,
) -> Result<AdmissibilityReport> {
    check_production_grid(v, reference)?;
    if trajectory.states.is_empty() {
        return Err(Error::Config("certificate needs a non-empty trajectory".into()));
    }
    let final_state = trajectory.final_state();
    if final_state.u.grid() != v.grid() {
        return Err(Error::Grid("trajectory grid does not match the candidate".into()));
    }
    if final_state.t <= 0.0 {
        return Err(Error::Config("certificate needs a trajectory with positive final time".into()));
    }
    let mut failing: Vec<String> = Vec::new();

    let trace_square = origin_mean_square(v)?;
    let mut jump_residuals = Vec::new();
    let mut jump_ok = true;
    for phi in jump_battery() {
        let r = weak_residual(v, &phi, reference)?;
        jump_ok &= r >= 1.0 - tol.jump_band;
        jump_residuals.push((phi.name, r));
    }
    if !jump_ok {
        failing.push("weak residual (jump battery)".into());
    }
    let mut trace_free_residuals = Vec::new();
    let mut trace_free_ok = true;
    for phi in trace_free_battery() {
        let r = weak_residual(v, &phi, reference)?;
        trace_free_ok &= r.abs() <= tol.trace_free_band;
        trace_free_residuals.push((phi.name, r));
    }
    if !trace_free_ok {
        failing.push("weak residual (trace-free battery)".into());
    }

    let oleinik = oleinik_violation(v);
    if !oleinik.verdict {
        failing.push("jump sign at the origin".into());
    }

    let mut trajectory_slopes = Vec::new();
    let mut slopes_ok = true;
    for state in &trajectory.states {
        if state.t > 0.0 {
            let report = oleinik_max_slope(&state.u, state.t)?;
            slopes_ok &= report.pass;
            trajectory_slopes.push((state.t, report));
        }
    }
    if trajectory_slopes.is_empty() || !slopes_ok {
        failing.push("entropy trajectory one-sided slope".into());
    }

    let separation = final_state.u.l1_distance_window(&v.mirror(), 1.0)?;
    if separation < tol.separation_min {
        failing.push("terminal separation".into());
    }

    let audit_worst = audit.map(|a| a.worst);
    let verdict = failing.is_empty();
    Ok(AdmissibilityReport {
        trace_square,
        oleinik,
        jump_residuals,
        trace_free_residuals,
        trajectory_slopes,
        separation,
        audit_worst,
        failing,
        verdict,
    })
}
