//! Dormand-Prince 8(5,3) step for a two-component state.

pub(crate) type State = [f64; 2];

const STAGES: usize = 12;

// The flow is autonomous, so the stage nodes c_i are not needed.
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];

const B: [f64; 12] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];

// eighth-order weights minus the embedded fifth-order ones; the last
// entry multiplies f at the new point
const E5: [f64; 13] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0];

/// Result of one attempted step.
pub(crate) struct Step {
    pub y: State,
    /// Derivative at the new point (first stage of the next step).
    pub dy: State,
    /// Fifth-order error estimate, already scaled by `h`.
    pub err5: State,
}

impl Step {
    /// RMS of the fifth-order error estimate, with `scale` the per-component
    /// tolerance. Controlling this estimate while advancing with the
    /// eighth-order solution is local extrapolation, so the propagated
    /// solution is well inside the requested tolerance.
    pub fn error_norm(&self, scale: &State) -> f64 {
        let mut e5 = 0.0;
        for i in 0..2 {
            e5 += (self.err5[i] / scale[i]).powi(2);
        }
        (0.5 * e5).sqrt()
    }
}

/// One step of size `h` from `y` with derivative `dy0`. Returns `None` if
/// the right-hand side fails at any stage.
pub(crate) fn dop853_step<F>(f: &F, y: &State, dy0: &State, h: f64) -> Option<Step>
where
    F: Fn(&State) -> Option<State>,
{
    let mut k = [[0.0; 2]; STAGES + 1];
    k[0] = *dy0;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[s] = f(&ys)?;
    }
    let mut y_new = *y;
    for (b, ks) in B.iter().zip(&k) {
        y_new[0] += h * b * ks[0];
        y_new[1] += h * b * ks[1];
    }
    k[STAGES] = f(&y_new)?;
    let mut err5 = [0.0; 2];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..2 {
            err5[i] += h * E5[s] * ks[i];
        }
    }
    Some(Step { y: y_new, dy: k[STAGES], err5 })
}

/// Cubic Hermite interpolant of one component on a step, at `theta` in `[0, 1]`.
pub(crate) fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + theta) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Stationary points of the Hermite interpolant strictly inside the step.
pub(crate) fn hermite_extrema(y0: f64, d0: f64, y1: f64, d1: f64, h: f64) -> Vec<f64> {
    // derivative in theta: a theta^2 + b theta + c
    let a = 6.0 * y0 + 3.0 * h * d0 - 6.0 * y1 + 3.0 * h * d1;
    let b = -6.0 * y0 - 4.0 * h * d0 + 6.0 * y1 - 2.0 * h * d1;
    let c = h * d0;
    let mut out = Vec::new();
    if a.abs() < 1e-300 {
        if b != 0.0 {
            out.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            // stable quadratic roots
            let q = -0.5 * (b + b.signum() * r);
            if q != 0.0 {
                out.push(q / a);
                out.push(c / q);
            } else {
                out.push(0.0);
            }
        }
    }
    out.retain(|t| *t > 0.0 && *t < 1.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_step_is_eighth_order() {
        // y'' = -y as a first-order system, exact solution (cos t, -sin t)
        let f = |y: &State| Some([y[1], -y[0]]);
        let y0 = [1.0, 0.0];
        let err_at = |h: f64| {
            let s = dop853_step(&f, &y0, &f(&y0).unwrap(), h).unwrap();
            (s.y[0] - h.cos()).abs().max((s.y[1] + h.sin()).abs())
        };
        let ratio = err_at(0.8) / err_at(0.4);
        // local error O(h^9)
        assert!(ratio > 350.0 && ratio < 700.0, "{ratio}");
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let y = |t: f64| t * t * t - t;
        let d = |t: f64| 3.0 * t * t - 1.0;
        let (a, b) = (-0.3, 1.2);
        let h = b - a;
        let v = hermite(y(a), d(a), y(b), d(b), h, 0.4);
        assert!((v - y(a + 0.4 * h)).abs() < 1e-14);
        let ext = hermite_extrema(y(a), d(a), y(b), d(b), h);
        assert_eq!(ext.len(), 1);
        assert!((a + ext[0] * h - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn failing_rhs_aborts_step() {
        let f = |y: &State| if y[0] > 1.0 { None } else { Some([1.0, 0.0]) };
        assert!(dop853_step(&f, &[0.95, 0.0], &[1.0, 0.0], 0.1).is_none());
    }
}
