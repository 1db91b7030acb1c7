//! Grid-sampled smoothing kernels and the regularized potential V_t.
//!
//! The kernel is point-sampled at the node offsets, truncated where its
//! mass is negligible, and renormalized to unit discrete mass. Point
//! sampling of a profile with a corner at the origin (the time-averaged
//! heat kernel has one) carries an Euler-Maclaurin defect of h^2/(12 t)
//! before renormalization; the renormalization absorbs it into the weights
//! and shifts the discrete second moment to t - h^2/12. Both numbers are
//! pinned by tests.

use crate::error::{invalid, numerical, Error, Result};
use crate::kernel::{eval_gaussian, eval_kernel, KernelSpec};
use crate::potential::Potential;
use crate::quad::gauss_legendre_on;

/// How a field is extended past the two boundary nodes during convolution.
///
/// Reflection mirrors the field across each domain edge (between the
/// boundary point and the first interior node, period 2n), which preserves
/// constants exactly; zero padding treats the outside as empty, which
/// drags boundary values down. The smoothing scale sqrt(t) is always small
/// against the domain here, so the choice only matters within a kernel
/// radius of the walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Reflect,
    ZeroPad,
}

impl std::fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryPolicy::Reflect => write!(f, "reflect"),
            BoundaryPolicy::ZeroPad => write!(f, "zero-pad"),
        }
    }
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflect" => Ok(BoundaryPolicy::Reflect),
            "zero-pad" | "zeropad" => Ok(BoundaryPolicy::ZeroPad),
            other => Err(invalid(format!("unknown boundary policy '{other}'"))),
        }
    }
}

/// A symmetric discrete convolution kernel on offsets -R..=R, stored as
/// the half `[w_0, w_1, .., w_R]` with h * (w_0 + 2 sum w_j) = 1 after
/// renormalization.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    t: f64,
    h: f64,
    half: Vec<f64>,
    mass_drift: f64,
    identity: bool,
}

impl DiscreteKernel {
    /// The degenerate single-node kernel: convolution with it returns the
    /// field unchanged, bit for bit.
    pub fn identity(t: f64, h: f64) -> DiscreteKernel {
        DiscreteKernel {
            t,
            h,
            half: vec![1.0 / h],
            mass_drift: 0.0,
            identity: true,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Truncation radius in nodes.
    pub fn radius(&self) -> usize {
        self.half.len() - 1
    }

    /// Truncation radius in domain units.
    pub fn truncation_radius(&self) -> f64 {
        self.radius() as f64 * self.h
    }

    /// Weights for offsets 0..=R; the weight at -j equals the one at j.
    pub fn half_weights(&self) -> &[f64] {
        &self.half
    }

    /// Signed defect of the raw point-sample mass before renormalization,
    /// h * sum_j k(j h) - 1.
    pub fn mass_drift(&self) -> f64 {
        self.mass_drift
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// Discrete second moment h * sum_j (j h)^2 w_j.
    pub fn second_moment(&self) -> f64 {
        let mut acc = 0.0;
        for (j, &w) in self.half.iter().enumerate().skip(1) {
            let x = j as f64 * self.h;
            acc += 2.0 * w * x * x;
        }
        self.h * acc
    }
}

/// Truncation rule shared by all sampled profiles: keep offsets out to
/// max(10 sqrt(t), 5h). At 10 sqrt(t) the kernel tail holds under 1e-9 of
/// the mass, and renormalization restores exact unit mass.
fn truncation_nodes(t: f64, h: f64) -> usize {
    ((10.0 * t.sqrt()).max(5.0 * h) / h).ceil() as usize
}

fn sample_profile(t: f64, h: f64, eval: impl Fn(f64) -> Result<f64>) -> Result<DiscreteKernel> {
    let r = truncation_nodes(t, h);
    let mut half = Vec::with_capacity(r + 1);
    for j in 0..=r {
        half.push(eval(j as f64 * h)?);
    }
    let mut acc = half[0];
    for w in &half[1..] {
        acc += 2.0 * w;
    }
    let s = h * acc;
    if !(s.is_finite() && s > 0.0) {
        return Err(numerical(format!(
            "degenerate kernel sample mass {s} at t={t}, h={h}"
        )));
    }
    for w in half.iter_mut() {
        *w /= s;
    }
    Ok(DiscreteKernel {
        t,
        h,
        half,
        mass_drift: s - 1.0,
        identity: false,
    })
}

/// Point samples of the time-averaged heat kernel at the node offsets.
/// When the kernel is narrower than one spacing (10 sqrt(t) < h) the
/// sampled weights would collapse onto the origin anyway, so the identity
/// kernel is returned with its flag set.
pub fn sample_kernel(spec: &KernelSpec, h: f64) -> Result<DiscreteKernel> {
    if spec.dim() != 1 {
        return Err(invalid(format!(
            "grid smoothing is one-dimensional, got d={}",
            spec.dim()
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("grid spacing must be positive, got {h}")));
    }
    let t = spec.t();
    if 10.0 * t.sqrt() < h {
        return Ok(DiscreteKernel::identity(t, h));
    }
    sample_profile(t, h, |x| eval_kernel(spec, x))
}

/// Point samples of the plain heat kernel at scale t (the comparison
/// Gaussian), truncated and renormalized the same way.
pub fn sample_gaussian(t: f64, h: f64) -> Result<DiscreteKernel> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("grid spacing must be positive, got {h}")));
    }
    let spec = KernelSpec::new(1, t)?;
    if 10.0 * t.sqrt() < h {
        return Ok(DiscreteKernel::identity(t, h));
    }
    sample_profile(t, h, |x| eval_gaussian(&spec, x))
}

fn fold_reflect(p: i64, n: i64) -> usize {
    let m = 2 * n;
    let mut q = p % m;
    if q < 0 {
        q += m;
    }
    (if q < n { q } else { m - 1 - q }) as usize
}

fn convolve_at_unchecked(
    field: &[f64],
    kernel: &DiscreteKernel,
    policy: BoundaryPolicy,
    i: usize,
) -> f64 {
    let n = field.len() as i64;
    let i = i as i64;
    let half = &kernel.half;
    let mut acc = half[0] * field[i as usize];
    match policy {
        BoundaryPolicy::Reflect => {
            for (j, &w) in half.iter().enumerate().skip(1) {
                let j = j as i64;
                acc += w * (field[fold_reflect(i - j, n)] + field[fold_reflect(i + j, n)]);
            }
        }
        BoundaryPolicy::ZeroPad => {
            for (j, &w) in half.iter().enumerate().skip(1) {
                let j = j as i64;
                let a = if i >= j { field[(i - j) as usize] } else { 0.0 };
                let b = if i + j < n {
                    field[(i + j) as usize]
                } else {
                    0.0
                };
                acc += w * (a + b);
            }
        }
    }
    kernel.h * acc
}

/// Discrete convolution (field * kernel)_i = h sum_j w_j field_{i-j} with
/// the out-of-range indices filled per `policy`. Output has the input's
/// length. The identity kernel short-circuits to a bitwise copy.
pub fn convolve(
    field: &[f64],
    kernel: &DiscreteKernel,
    policy: BoundaryPolicy,
) -> Result<Vec<f64>> {
    if field.is_empty() {
        return Err(invalid("cannot convolve an empty field"));
    }
    if kernel.identity {
        return Ok(field.to_vec());
    }
    Ok((0..field.len())
        .map(|i| convolve_at_unchecked(field, kernel, policy, i))
        .collect())
}

/// Single output node of the convolution; same conventions as [`convolve`].
pub fn convolve_at(
    field: &[f64],
    kernel: &DiscreteKernel,
    policy: BoundaryPolicy,
    i: usize,
) -> Result<f64> {
    if i >= field.len() {
        return Err(invalid(format!(
            "node {i} out of range for field of {}",
            field.len()
        )));
    }
    if kernel.identity {
        return Ok(field[i]);
    }
    Ok(convolve_at_unchecked(field, kernel, policy, i))
}

/// V_t = V * k_t on the potential's grid, with the smoothing time and
/// boundary policy kept alongside the values.
#[derive(Debug, Clone)]
pub struct RegularizedPotential {
    values: Vec<f64>,
    t: f64,
    policy: BoundaryPolicy,
    identity: bool,
}

impl RegularizedPotential {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    /// True when the smoothing degenerated to the identity (t = 0 or the
    /// kernel narrower than one node spacing), so values equal the input.
    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

pub fn regularized_potential(
    v: &Potential,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<RegularizedPotential> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!(
            "smoothing time must be finite and >= 0, got {t}"
        )));
    }
    let h = v.grid().h();
    let kernel = if t == 0.0 {
        DiscreteKernel::identity(t, h)
    } else {
        sample_kernel(&KernelSpec::new(1, t)?, h)?
    };
    let identity = kernel.is_identity();
    let values = convolve(v.values(), &kernel, policy)?;
    Ok(RegularizedPotential {
        values,
        t,
        policy,
        identity,
    })
}

/// Default smoothing time: the reciprocal of the mean potential, clamped
/// to [4 h^2, 1e-2]. The lower end keeps the kernel wider than a node
/// spacing; the upper end keeps sqrt(t) well under the domain size.
pub fn default_time_scale(v: &Potential) -> f64 {
    let h = v.grid().h();
    let hi = 1e-2;
    let lo = (4.0 * h * h).min(hi);
    let mean = v.mean();
    if mean <= 0.0 {
        return hi;
    }
    (1.0 / mean).clamp(lo, hi)
}

/// Order of the Gauss-Legendre rule used for the time integral of the
/// second-order term.
const SECOND_ORDER_GL_POINTS: usize = 48;

/// Second moment of the path average of V at node x over horizon t:
///
/// ```text
///   2 int_0^t (t - s) [ (V . (V*k_{t-s})) * g_s ](x) ds ,
/// ```
///
/// evaluated by Gauss-Legendre in s with grid convolutions inside. For
/// constant V = c this collapses to c^2 t^2 exactly; in general it is the
/// deterministic counterpart of the Monte Carlo second moment.
pub fn second_order_term(
    v: &Potential,
    node: usize,
    t: f64,
    policy: BoundaryPolicy,
) -> Result<f64> {
    let grid = v.grid();
    let n = grid.n();
    if node >= n {
        return Err(invalid(format!("node {node} out of range for grid of {n}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {t}")));
    }
    let guard = 5.0 * t.sqrt();
    if grid.boundary_distance(node) < guard {
        return Err(invalid(format!(
            "node {node} is within 5 sqrt(t) = {guard} of the boundary"
        )));
    }
    let h = grid.h();
    let (nodes, weights) = gauss_legendre_on(SECOND_ORDER_GL_POINTS, 0.0, t);
    let mut total = 0.0;
    for (&s, &a) in nodes.iter().zip(&weights) {
        let smoothed = {
            let rem = t - s;
            let kernel = if 10.0 * rem.sqrt() < h {
                DiscreteKernel::identity(rem, h)
            } else {
                sample_kernel(&KernelSpec::new(1, rem)?, h)?
            };
            convolve(v.values(), &kernel, policy)?
        };
        let product: Vec<f64> = v
            .values()
            .iter()
            .zip(&smoothed)
            .map(|(a, b)| a * b)
            .collect();
        let gs = sample_gaussian(s, h)?;
        let at_node = convolve_at(&product, &gs, policy, node)?;
        total += a * (t - s) * at_node;
    }
    Ok(2.0 * total)
}
