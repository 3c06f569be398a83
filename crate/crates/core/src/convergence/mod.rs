//! Numerical checks of the two convergence bounds on a strongly-convex
//! federated-SGD testbed. Quadratic clients make every constant of the
//! bounds (mu, beta, G, sigma, theta*, Phi, H) available in closed form, so
//! both sides of each inequality are computable without estimation error on
//! the constants; expectations are estimated over common-random-number
//! replicas.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

/// One client objective `f_n(theta) = 1/2 * sum_j curv_j (theta_j - c_j)^2`
/// plus additive gradient noise. Isotropic curvature gives beta = mu; a
/// diagonal anisotropic curvature exercises beta > mu.
#[derive(Debug, Clone)]
pub struct QuadraticClient {
    pub center: Vec<f64>,
    /// Diagonal of the Hessian; all entries positive.
    pub curvature: Vec<f64>,
    /// Std-dev of the total gradient noise (2-norm sense).
    pub noise_std: f64,
    /// Simplex weight p_n.
    pub weight: f64,
}

impl QuadraticClient {
    /// Isotropic client: curvature mu in every coordinate.
    pub fn isotropic(center: Vec<f64>, mu: f64, noise_std: f64, weight: f64) -> Self {
        let curvature = vec![mu; center.len()];
        Self { center, curvature, noise_std, weight }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * theta
            .iter()
            .zip(self.center.iter())
            .zip(self.curvature.iter())
            .map(|((&t, &c), &k)| k * (t - c) * (t - c))
            .sum::<f64>()
    }

    fn gradient(&self, theta: &[f64], out: &mut [f64]) {
        for (((g, &t), &c), &k) in out
            .iter_mut()
            .zip(theta.iter())
            .zip(self.center.iter())
            .zip(self.curvature.iter())
        {
            *g = k * (t - c);
        }
    }
}

fn validate_clients(clients: &[QuadraticClient]) -> Result<usize> {
    if clients.is_empty() {
        return Err(Error::InvalidParameter("at least one client required".into()));
    }
    let dim = clients[0].center.len();
    let mut weight_sum = 0.0;
    for c in clients {
        if c.center.len() != dim || c.curvature.len() != dim {
            return Err(Error::ShapeMismatch("client dimensions disagree".into()));
        }
        if dim == 0 || c.curvature.iter().any(|&k| k <= 0.0) {
            return Err(Error::InvalidParameter("curvature must be positive".into()));
        }
        if c.noise_std < 0.0 || c.weight <= 0.0 {
            return Err(Error::InvalidParameter("noise std and weights must be valid".into()));
        }
        weight_sum += c.weight;
    }
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("weights sum to {weight_sum}, not 1")));
    }
    Ok(dim)
}

/// Closed-form minimizer of `sum_n p_n f_n` and the heterogeneity gap
/// `Phi = f(theta*) - sum_n p_n f_n*` (each `f_n* = 0` here).
pub fn optimum(clients: &[QuadraticClient]) -> Result<(Vec<f64>, f64)> {
    let dim = validate_clients(clients)?;
    let mut theta = vec![0.0; dim];
    for j in 0..dim {
        let num: f64 = clients.iter().map(|c| c.weight * c.curvature[j] * c.center[j]).sum();
        let den: f64 = clients.iter().map(|c| c.weight * c.curvature[j]).sum();
        theta[j] = num / den;
    }
    let phi = clients.iter().map(|c| c.weight * c.value(&theta)).sum();
    Ok((theta, phi))
}

/// Decreasing step-size schedule `phi_t = b / (t + a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Harmonic { a: f64, b: f64 },
    /// Out of scope for the bounds; rejected by the precondition gate.
    Constant(f64),
}

impl Schedule {
    pub fn rate(&self, t: u64) -> f64 {
        match *self {
            Schedule::Harmonic { a, b } => b / (t as f64 + a),
            Schedule::Constant(r) => r,
        }
    }

    /// Hypothesis gate: decreasing schedule with `b > 1/mu`,
    /// `phi_1 <= min(1/mu, 1/(4 beta))`, and `phi_t <= 2 phi_{t+X}`
    /// (equivalent to `a >= X - 1`).
    pub fn validate(&self, mu: f64, beta: f64, local_updates: u64) -> Result<()> {
        let (a, b) = match *self {
            Schedule::Harmonic { a, b } => (a, b),
            Schedule::Constant(_) => {
                return Err(Error::Schedule("constant learning rate is not decreasing".into()))
            }
        };
        if a < 0.0 || b <= 0.0 {
            return Err(Error::Schedule("schedule parameters must be positive".into()));
        }
        if b * mu <= 1.0 {
            return Err(Error::Schedule(format!("need b > 1/mu, got b={b}, mu={mu}")));
        }
        let phi1 = b / (1.0 + a);
        let cap = (1.0 / mu).min(1.0 / (4.0 * beta));
        if phi1 > cap + 1e-12 {
            return Err(Error::Schedule(format!("phi_1={phi1} exceeds min(1/mu, 1/(4beta))={cap}")));
        }
        if a + 1.0 < local_updates as f64 {
            return Err(Error::Schedule(format!(
                "need a >= X-1 so that phi_t <= 2 phi_(t+X); a={a}, X={local_updates}"
            )));
        }
        Ok(())
    }
}

/// Replica-averaged statistics at one global step.
#[derive(Debug, Clone)]
pub struct StepStat {
    pub t: u64,
    pub phi: f64,
    /// Mean and standard error of `|theta_bar_t - theta*|^2`.
    pub delta: f64,
    pub delta_se: f64,
    /// Mean of `|v_bar_{t+1} - theta*|^2`.
    pub v_next: f64,
    /// Paired one-step statistic
    /// `|v_bar_{t+1} - theta*|^2 - (1 - mu phi_t)|theta_bar_t - theta*|^2`,
    /// whose expectation the first bound caps at `phi_t^2 H`.
    pub pair_mean: f64,
    pub pair_se: f64,
}

/// Full testbed output: the per-step trace plus every constant entering
/// the bounds.
#[derive(Debug, Clone)]
pub struct TheoremTrace {
    pub steps: Vec<StepStat>,
    pub mu: f64,
    pub beta: f64,
    pub phi_gap: f64,
    /// Max observed squared stochastic-gradient norm (noise included).
    pub g_squared: f64,
    pub h: f64,
    pub schedule: Schedule,
    pub local_updates: u64,
    pub replicas: usize,
    pub delta_1: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Gaussian truncated at six standard deviations, per coordinate, scaled so
/// the expected squared 2-norm of the whole noise vector is `sigma^2`.
fn fill_noise(rng: &mut ChaCha8Rng, sigma: f64, out: &mut [f64]) {
    if sigma == 0.0 {
        out.fill(0.0);
        return;
    }
    let coord_std = sigma / (out.len() as f64).sqrt();
    for v in out.iter_mut() {
        // Box-Muller; resample the rare tail beyond six sigmas.
        loop {
            let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            if z.abs() <= 6.0 {
                *v = coord_std * z;
                break;
            }
        }
    }
}

/// Simulate the periodic-averaging dynamics: every client runs local SGD
/// steps `theta <- theta - phi_t (grad f_n + noise)`; every `local_updates`
/// steps the weighted mean replaces all local iterates. Expectations are
/// taken over `replicas` common-random-number replicas.
pub fn run_fedsgd(
    clients: &[QuadraticClient],
    local_updates: u64,
    periods: u64,
    schedule: Schedule,
    theta_start: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<TheoremTrace> {
    let dim = validate_clients(clients)?;
    if theta_start.len() != dim {
        return Err(Error::ShapeMismatch("start point dimension mismatch".into()));
    }
    if local_updates < 1 || periods < 1 || replicas < 1 {
        return Err(Error::InvalidParameter("steps, periods, replicas must be >= 1".into()));
    }
    let mu = clients
        .iter()
        .flat_map(|c| c.curvature.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let beta = clients
        .iter()
        .flat_map(|c| c.curvature.iter())
        .cloned()
        .fold(0.0, f64::max);
    schedule.validate(mu, beta, local_updates)?;
    let (theta_star, phi_gap) = optimum(clients)?;

    let total_steps = local_updates * periods;
    let n = clients.len();
    let mut deltas: Vec<Vec<f64>> = vec![Vec::with_capacity(replicas); total_steps as usize];
    let mut v_nexts: Vec<Vec<f64>> = vec![Vec::with_capacity(replicas); total_steps as usize];
    let mut pairs: Vec<Vec<f64>> = vec![Vec::with_capacity(replicas); total_steps as usize];
    let mut g_squared = 0.0f64;

    let sq_dist = |x: &[f64]| -> f64 {
        x.iter().zip(theta_star.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    };

    for replica in 0..replicas {
        let mut rngs: Vec<ChaCha8Rng> = (0..n)
            .map(|c| {
                seeding::rng(seed, Stream::ConvergenceNoise, (replica * n + c) as u64)
            })
            .collect();
        let mut local: Vec<Vec<f64>> = vec![theta_start.to_vec(); n];
        let mut grad = vec![0.0; dim];
        let mut noise = vec![0.0; dim];
        let mut vbar = vec![0.0; dim];
        let mut theta_bar = vec![0.0; dim];
        for t in 1..=total_steps {
            let phi = schedule.rate(t);
            theta_bar.fill(0.0);
            for (c, th) in clients.iter().zip(local.iter()) {
                for (acc, &v) in theta_bar.iter_mut().zip(th.iter()) {
                    *acc += c.weight * v;
                }
            }
            let d_t = sq_dist(&theta_bar);
            vbar.fill(0.0);
            for (i, client) in clients.iter().enumerate() {
                client.gradient(&local[i], &mut grad);
                fill_noise(&mut rngs[i], client.noise_std, &mut noise);
                let mut g2 = 0.0;
                for ((th, g), z) in local[i].iter_mut().zip(grad.iter()).zip(noise.iter()) {
                    let stoch = g + z;
                    g2 += stoch * stoch;
                    *th -= phi * stoch;
                }
                g_squared = g_squared.max(g2);
                for (acc, &v) in vbar.iter_mut().zip(local[i].iter()) {
                    *acc += client.weight * v;
                }
            }
            let v_t = sq_dist(&vbar);
            if t % local_updates == 0 {
                for th in local.iter_mut() {
                    th.copy_from_slice(&vbar);
                }
            }
            let idx = (t - 1) as usize;
            deltas[idx].push(d_t);
            v_nexts[idx].push(v_t);
            pairs[idx].push(v_t - (1.0 - mu * phi) * d_t);
        }
    }

    let p2s2: f64 = clients.iter().map(|c| c.weight * c.weight * c.noise_std * c.noise_std).sum();
    let x = local_updates as f64;
    let h = p2s2 + 6.0 * beta * phi_gap + 8.0 * (x - 1.0) * (x - 1.0) * g_squared;

    let steps = (1..=total_steps)
        .map(|t| {
            let idx = (t - 1) as usize;
            let (delta, delta_se) = mean_se(&deltas[idx]);
            let (v_next, _) = mean_se(&v_nexts[idx]);
            let (pair_mean, pair_se) = mean_se(&pairs[idx]);
            StepStat { t, phi: schedule.rate(t), delta, delta_se, v_next, pair_mean, pair_se }
        })
        .collect();

    Ok(TheoremTrace {
        steps,
        mu,
        beta,
        phi_gap,
        g_squared,
        h,
        schedule,
        local_updates,
        replicas,
        delta_1: sq_dist(theta_start),
    })
}

/// Per-step verdicts of the one-step bound
/// `E|v_bar_{t+1} - theta*|^2 <= (1 - mu phi_t) E|theta_bar_t - theta*|^2 + phi_t^2 H`,
/// evaluated as a paired statistic within three standard errors.
/// `h_override` substitutes a different H (used by the mutation check).
#[derive(Debug, Clone)]
pub struct StepVerdict {
    pub t: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn check_theorem1(trace: &TheoremTrace, h_override: Option<f64>) -> Vec<StepVerdict> {
    let h = h_override.unwrap_or(trace.h);
    trace
        .steps
        .iter()
        .map(|s| {
            let rhs = s.phi * s.phi * h;
            let tolerance = 3.0 * s.pair_se;
            StepVerdict {
                t: s.t,
                lhs: s.pair_mean,
                rhs,
                tolerance,
                holds: s.pair_mean <= rhs + tolerance,
            }
        })
        .collect()
}

/// Whole-trajectory bound `Delta_t <= rho / (a + t)` with
/// `rho = max(b^2 H / (b mu - 1), (a + 1) Delta_1)`.
#[derive(Debug, Clone)]
pub struct Theorem2Report {
    pub rho: f64,
    pub violations: Vec<u64>,
    pub holds: bool,
}

pub fn check_theorem2(trace: &TheoremTrace) -> Result<Theorem2Report> {
    let (a, b) = match trace.schedule {
        Schedule::Harmonic { a, b } => (a, b),
        Schedule::Constant(_) => {
            return Err(Error::Schedule("bound requires the decreasing schedule".into()))
        }
    };
    let rho = (b * b * trace.h / (b * trace.mu - 1.0)).max((a + 1.0) * trace.delta_1);
    let violations: Vec<u64> = trace
        .steps
        .iter()
        .filter(|s| s.delta > rho / (a + s.t as f64) + 3.0 * s.delta_se)
        .map(|s| s.t)
        .collect();
    Ok(Theorem2Report { holds: violations.is_empty(), rho, violations })
}

/// Randomized heterogeneous test instance: clients with centers in
/// [-1, 1]^dim, mixed curvatures, mixed noise levels, random simplex
/// weights, and a schedule satisfying the hypothesis gate for the given X.
pub fn random_instance(
    num_clients: usize,
    dim: usize,
    local_updates: u64,
    seed: u64,
) -> (Vec<QuadraticClient>, Schedule, Vec<f64>) {
    let mut rng = seeding::rng(seed, Stream::PolicyInit, 0);
    let anisotropic = rng.gen_bool(0.5);
    let mut clients: Vec<QuadraticClient> = (0..num_clients)
        .map(|_| {
            let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let curvature: Vec<f64> = (0..dim)
                .map(|_| if anisotropic { rng.gen_range(0.5..2.0) } else { 1.0 })
                .collect();
            QuadraticClient {
                center,
                curvature,
                noise_std: rng.gen_range(0.0..1.0),
                weight: rng.gen_range(0.5..1.5),
            }
        })
        .collect();
    let total: f64 = clients.iter().map(|c| c.weight).sum();
    for c in &mut clients {
        c.weight /= total;
    }
    let mu = clients.iter().flat_map(|c| c.curvature.iter()).cloned().fold(f64::INFINITY, f64::min);
    let beta = clients.iter().flat_map(|c| c.curvature.iter()).cloned().fold(0.0, f64::max);
    let b = 1.5 / mu;
    let a = (local_updates as f64 - 1.0).max(4.0 * beta * b - 1.0);
    let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    (clients, Schedule::Harmonic { a, b }, start)
}

/// Trace as CSV: `t, delta, theorem1_rhs, theorem2_bound`.
pub fn trace_to_csv(trace: &TheoremTrace) -> String {
    let a = match trace.schedule {
        Schedule::Harmonic { a, .. } => a,
        Schedule::Constant(_) => f64::NAN,
    };
    let rho = match check_theorem2(trace) {
        Ok(report) => report.rho,
        Err(_) => f64::NAN,
    };
    let mut out = String::from("t,delta,theorem1_rhs,theorem2_bound\n");
    for s in &trace.steps {
        let rhs = (1.0 - trace.mu * s.phi) * s.delta + s.phi * s.phi * trace.h;
        let bound = rho / (a + s.t as f64);
        out.push_str(&format!("{},{:.9e},{:.9e},{:.9e}\n", s.t, s.delta, rhs, bound));
    }
    out
}
