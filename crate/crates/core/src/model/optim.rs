//! Quasi-Newton minimization.
//!
//! BFGS on the inverse Hessian with a backtracking line search. A step is
//! accepted under the Armijo condition, or under the approximate Wolfe
//! condition of Hager and Zhang once function differences are at rounding
//! level and only the gradient still carries information.
//! Objectives are closures that return the function value and write the
//! gradient into the provided buffer.

/// Stopping rules for [`minimize`].
#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged once `max |gᵢ| <= grad_tol * max(1, |f|)`.
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl BfgsOutcome {
    pub fn grad_norm(&self) -> f64 {
        inf_norm(&self.grad)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn identity(n: usize, scale: f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = scale;
    }
    h
}

/// Minimizes `objective` starting from `x0`.
pub fn minimize<F>(mut objective: F, x0: Vec<f64>, opts: BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = objective(&x, &mut g);
    let tol = |f: f64| opts.grad_tol * f.abs().max(1.0);

    if n == 0 {
        return BfgsOutcome { x, f, grad: g, iterations: 0, converged: true };
    }

    let mut h = identity(n, 1.0);
    let mut fresh_h = true;
    let mut retried = false;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if !f.is_finite() || inf_norm(&g) <= tol(f) {
            break;
        }
        iterations += 1;

        for i in 0..n {
            dir[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            // Not a descent direction: fall back to steepest descent.
            h = identity(n, 1.0);
            fresh_h = true;
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = dot(&dir, &g);
        }

        let mut step = if fresh_h { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let mut accepted = false;
        let mut f_new = f;
        let f_noise = 1e-9 * f.abs().max(1.0);
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            if x_new == x {
                break;
            }
            f_new = objective(&x_new, &mut g_new);
            if f_new.is_finite() {
                let armijo = f_new <= f + 1e-4 * step * slope;
                let new_slope = dot(&dir, &g_new);
                let approx_wolfe =
                    f_new <= f + f_noise && new_slope >= 0.9 * slope && new_slope <= -0.8 * slope;
                if armijo || approx_wolfe {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }

        if !accepted {
            if retried || fresh_h {
                break;
            }
            // Restart from a scaled identity once before giving up.
            retried = true;
            h = identity(n, 1.0);
            fresh_h = true;
            continue;
        }

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;

        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() {
            if fresh_h {
                h = identity(n, sy / yy);
                fresh_h = false;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
            retried = false;
        }
    }

    let converged = f.is_finite() && inf_norm(&g) <= tol(f);
    BfgsOutcome { x, f, grad: g, iterations, converged }
}

/// Central-difference gradient of a scalar function.
pub fn central_difference<F>(mut f: F, x: &[f64], grad: &mut [f64])
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 6e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
}
