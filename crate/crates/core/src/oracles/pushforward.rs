//! Closed-form scattered field of a pushforward medium: the total field is
//! u^inc o Phi^{-1}, so u^sc = u^inc o Phi^{-1} - u^inc, which vanishes
//! wherever Phi is the identity.

use num_complex::Complex64 as C;

use crate::coefficients::Diffeomorphism;
use crate::solver::{FieldRole, WaveField};
use crate::waves::IncidentWave;

/// Value and gradient of u^inc o Phi^{-1} - u^inc at x.
pub fn pushforward_scattered_eval(phi: &Diffeomorphism, w: &IncidentWave, x: [f64; 2]) -> (C, [C; 2]) {
    let p = phi.inverse(x);
    if p == x {
        return (C::new(0.0, 0.0), [C::new(0.0, 0.0); 2]);
    }
    // grad (w o Phi^{-1})(x) = J(p)^{-T} grad w(p)
    let j = phi.jacobian(p);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let g = w.grad(p);
    let gp = [(g[0] * j[1][1] - g[1] * j[1][0]) / det, (g[1] * j[0][0] - g[0] * j[0][1]) / det];
    let g0 = w.grad(x);
    (w.value(p) - w.value(x), [gp[0] - g0[0], gp[1] - g0[1]])
}

/// The closed-form scattered field on the disk of the given radius.
pub fn pushforward_scattered_field(phi: Diffeomorphism, w: IncidentWave, radius: f64) -> WaveField {
    WaveField::closed_form(FieldRole::ClosedForm, radius, move |x| pushforward_scattered_eval(&phi, &w, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::bump_diffeomorphism;
    use crate::waves::plane_wave;

    #[test]
    fn gradient_matches_finite_differences() {
        let phi = bump_diffeomorphism([0.05, 0.0], 0.25, 0.1).unwrap();
        let w = plane_wave(2.0, [0.6, 0.8]).unwrap();
        let e = 1e-6;
        for x in [[0.1, 0.05], [-0.1, 0.1], [0.2, -0.05]] {
            let (_, g) = pushforward_scattered_eval(&phi, &w, x);
            for k in 0..2 {
                let mut a = x;
                let mut b = x;
                a[k] += e;
                b[k] -= e;
                let fd = (pushforward_scattered_eval(&phi, &w, a).0 - pushforward_scattered_eval(&phi, &w, b).0) / (2.0 * e);
                assert!((fd - g[k]).norm() < 1e-7, "{fd} {}", g[k]);
            }
        }
        assert_eq!(pushforward_scattered_eval(&phi, &w, [0.5, 0.0]).0, C::new(0.0, 0.0));
    }

    #[test]
    fn corner_swirl_field_lives_in_the_sector() {
        let phi = Diffeomorphism::CornerSwirl { corner: [0.0, 0.0], rotation: 0.0, angle: 2.0, radius: 0.8, amplitude: 0.5 };
        let w = plane_wave(1.0, [0.0, 1.0]).unwrap();
        assert!(pushforward_scattered_eval(&phi, &w, [0.3, 0.3]).0.norm() > 1e-4);
        assert_eq!(pushforward_scattered_eval(&phi, &w, [0.3, -0.01]).0, C::new(0.0, 0.0));
        assert_eq!(pushforward_scattered_eval(&phi, &w, [0.0, 0.9]).0, C::new(0.0, 0.0));
    }
}
