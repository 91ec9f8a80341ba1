//! Convolutional PML coefficients along one axis.

use super::{PmlProfile, Wall};

/// Nodes of one axis that carry auxiliary PML fields.
///
/// A slot covers both the integer position `i` and the half position `i + 1/2`.
#[derive(Debug, Clone, Default)]
pub(crate) struct AxisPml {
    pub node_of: Vec<usize>,
    pub b_int: Vec<f64>,
    pub c_int: Vec<f64>,
    pub b_half: Vec<f64>,
    pub c_half: Vec<f64>,
}

impl AxisPml {
    pub fn new(n: usize, walls: [Wall; 2], cells: usize, profile: &PmlProfile, h: f64, dt: f64) -> Self {
        let lo = walls[0] == Wall::Pml;
        let hi = walls[1] == Wall::Pml;
        let mut out = AxisPml::default();
        if !lo && !hi {
            return out;
        }
        let thick = cells as f64;
        let x_lo = thick;
        let x_hi = (n - 1) as f64 - thick;
        let sigma_max = profile.sigma_max.unwrap_or(0.8 * (profile.order + 1.0) / h);
        let depth = |x: f64| -> f64 {
            if lo && x < x_lo {
                (x_lo - x) / thick
            } else if hi && x > x_hi {
                (x - x_hi) / thick
            } else {
                0.0
            }
        };
        let coeff = |rho: f64| -> (f64, f64) {
            if rho <= 0.0 {
                return (1.0, 0.0);
            }
            let sigma = sigma_max * rho.powf(profile.order);
            let alpha = profile.alpha_max * (1.0 - rho);
            let b = (-(sigma + alpha) * dt).exp();
            let c = if sigma > 0.0 { sigma / (sigma + alpha) * (b - 1.0) } else { 0.0 };
            (b, c)
        };
        for i in 0..n {
            let ri = depth(i as f64);
            let rh = if i + 1 < n { depth(i as f64 + 0.5) } else { 0.0 };
            if ri > 0.0 || rh > 0.0 {
                let (bi, ci) = coeff(ri);
                let (bh, ch) = coeff(rh);
                out.node_of.push(i);
                out.b_int.push(bi);
                out.c_int.push(ci);
                out.b_half.push(bh);
                out.c_half.push(ch);
            }
        }
        out
    }

    pub fn slots(&self) -> usize {
        self.node_of.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_profile() {
        let p = AxisPml::new(40, [Wall::Pec, Wall::Pml], 10, &PmlProfile::default(), 0.05, 0.0144);
        // high side only: half positions 29.5..38.5 and integer 30..39
        assert_eq!(p.node_of.first(), Some(&29));
        assert_eq!(p.node_of.last(), Some(&39));
        // attenuation grows outward
        for w in p.c_int.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(p.c_int[0], 0.0);
        assert!(p.b_int.iter().all(|b| *b > 0.0 && *b <= 1.0));
    }

    #[test]
    fn no_pml_no_slots() {
        let p = AxisPml::new(40, [Wall::Pec, Wall::Pmc], 10, &PmlProfile::default(), 0.05, 0.0144);
        assert_eq!(p.slots(), 0);
    }
}
