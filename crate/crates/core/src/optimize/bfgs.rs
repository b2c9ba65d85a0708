use nalgebra::{DMatrix, DVector};

/// Iterations over which the value must improve by at least `tol`.
pub(crate) const STALL_WINDOW: usize = 20;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const GRAD_FLOOR: f64 = 1e-11;
/// Early stop: the quasi-Newton predicted decrease `½ gᵀHg` stays below
/// `DECREMENT_FRACTION · tol`, with per-step improvement below `tol`, for
/// `DECREMENT_STREAK` consecutive iterations.
const DECREMENT_FRACTION: f64 = 1e-2;
const DECREMENT_STREAK: usize = 3;

/// Smooth objective over `R^n`, minimized.
pub(crate) trait Smooth {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Central-difference gradient at `x`.
    fn gradient(&mut self, x: &[f64], eps: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            probe[i] = x[i] + eps;
            let fp = self.value(&probe);
            probe[i] = x[i] - eps;
            let fm = self.value(&probe);
            probe[i] = x[i];
            g[i] = (fp - fm) / (2.0 * eps);
        }
        g
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BfgsSettings {
    pub max_iters: usize,
    pub step_init: f64,
    pub grad_eps: f64,
    pub tol: f64,
    /// Stop once the value improved by less than `tol` over this many iterations.
    pub stall_window: usize,
}

#[derive(Debug)]
pub(crate) struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Quasi-Newton descent with Armijo backtracking (step halving). Returns
/// `None` when the objective produces NaN.
pub(crate) fn minimize<S: Smooth + ?Sized>(
    f: &mut S,
    x0: Vec<f64>,
    cfg: &BfgsSettings,
) -> Option<BfgsOutcome> {
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut fx = f.value(x.as_slice());
    if fx.is_nan() {
        return None;
    }
    let mut g = DVector::from_vec(f.gradient(x.as_slice(), cfg.grad_eps));
    if g.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut h: Option<DMatrix<f64>> = None;
    let mut history = vec![fx];
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = false;
    let mut streak = 0;

    while iterations < cfg.max_iters {
        if !fx.is_finite() || g.amax() <= GRAD_FLOOR {
            converged = fx.is_finite();
            break;
        }
        let mut d = match &h {
            Some(hm) => -(hm * &g),
            None => &g * (-cfg.step_init / g.norm()),
        };
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            d = &g * (-cfg.step_init / g.norm());
            slope = g.dot(&d);
            h = None;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let xn = &x + &d * t;
            let fn_ = f.value(xn.as_slice());
            if fn_.is_nan() {
                return None;
            }
            if fn_ <= fx + ARMIJO_C * t * slope {
                accepted = Some((xn, fn_));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if fresh {
                converged = true;
                break;
            }
            h = None;
            fresh = true;
            continue;
        };
        let gn = DVector::from_vec(f.gradient(xn.as_slice(), cfg.grad_eps));
        if gn.iter().any(|v| v.is_nan()) {
            return None;
        }
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hm = h.take().unwrap_or_else(|| DMatrix::identity(n, n) * (sy / y.dot(&y)));
            let hy = &hm * &y;
            let yhy = y.dot(&hy);
            // H+ = H - ρ(s yᵀH + H y sᵀ) + (ρ² yᵀHy + ρ) s sᵀ
            let mut hn = hm;
            hn -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hn += (&s * s.transpose()) * (rho * rho * yhy + rho);
            h = Some(hn);
        }
        x = xn;
        fx = fn_;
        g = gn;
        fresh = false;
        iterations += 1;
        let step_gain = history[history.len() - 1] - fx;
        history.push(fx);
        let predicted = h.as_ref().map(|hm| 0.5 * g.dot(&(hm * &g)));
        if step_gain < cfg.tol && predicted.is_some_and(|p| p >= 0.0 && p < DECREMENT_FRACTION * cfg.tol) {
            streak += 1;
            if streak >= DECREMENT_STREAK {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
        if history.len() > cfg.stall_window {
            let past = history[history.len() - 1 - cfg.stall_window];
            if past - fx < cfg.tol {
                converged = true;
                break;
            }
        }
    }
    Some(BfgsOutcome {
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
        converged,
    })
}
