//! Three-dimensional complex FFT on row-major arrays.
//!
//! Convention: a field is `f(x) = Σ_ξ c_ξ e^{iξ·x}`. `forward` maps samples to
//! coefficients (normalized by `1/N`), `inverse` maps coefficients back to
//! samples (unnormalized).

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

pub struct Fft3 {
    n: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

thread_local! {
    static PLANS: RefCell<HashMap<[usize; 3], Rc<Fft3>>> = RefCell::new(HashMap::new());
}

impl Fft3 {
    fn build(n: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let plan = |planner: &mut FftPlanner<f64>, len: usize, dir: FftDirection| {
            planner.plan_fft(len, dir)
        };
        Self {
            n,
            forward: [
                plan(&mut planner, n[0], FftDirection::Forward),
                plan(&mut planner, n[1], FftDirection::Forward),
                plan(&mut planner, n[2], FftDirection::Forward),
            ],
            inverse: [
                plan(&mut planner, n[0], FftDirection::Inverse),
                plan(&mut planner, n[1], FftDirection::Inverse),
                plan(&mut planner, n[2], FftDirection::Inverse),
            ],
        }
    }

    /// Cached plan for this thread.
    pub fn for_shape(n: [usize; 3]) -> Rc<Fft3> {
        PLANS.with(|plans| {
            plans
                .borrow_mut()
                .entry(n)
                .or_insert_with(|| Rc::new(Fft3::build(n)))
                .clone()
        })
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n0, n1, n2] = self.n;
        assert_eq!(data.len(), n0 * n1 * n2, "buffer does not match FFT shape");
        let scratch_len = plans
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        // innermost axis: contiguous rows
        plans[2].process_with_scratch(data, &mut scratch);

        // middle axis: gather lanes per outer slab
        let mut slab = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for i0 in 0..n0 {
            let base = i0 * n1 * n2;
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    slab[i2 * n1 + i1] = data[base + i1 * n2 + i2];
                }
            }
            plans[1].process_with_scratch(&mut slab, &mut scratch);
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    data[base + i1 * n2 + i2] = slab[i2 * n1 + i1];
                }
            }
        }

        // outermost axis
        let plane = n1 * n2;
        let mut lanes = vec![Complex64::new(0.0, 0.0); data.len()];
        for i0 in 0..n0 {
            for q in 0..plane {
                lanes[q * n0 + i0] = data[i0 * plane + q];
            }
        }
        plans[0].process_with_scratch(&mut lanes, &mut scratch);
        for i0 in 0..n0 {
            for q in 0..plane {
                data[i0 * plane + q] = lanes[q * n0 + i0];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn forward_recovers_single_mode() {
        let n = [8, 4, 6];
        let plan = Fft3::for_shape(n);
        let mut data = vec![Complex64::new(0.0, 0.0); 8 * 4 * 6];
        let (m0, m1, m2) = (2i64, -1i64, 3i64);
        for i0 in 0..8 {
            for i1 in 0..4 {
                for i2 in 0..6 {
                    let phase = 2.0
                        * PI
                        * (m0 as f64 * i0 as f64 / 8.0
                            + m1 as f64 * i1 as f64 / 4.0
                            + m2 as f64 * i2 as f64 / 6.0);
                    data[(i0 * 4 + i1) * 6 + i2] = Complex64::from_polar(1.5, phase);
                }
            }
        }
        plan.forward(&mut data);
        let target = (2 * 4 + 3) * 6 + 3;
        for (idx, v) in data.iter().enumerate() {
            if idx == target {
                assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-13);
            } else {
                assert!(v.norm() < 1e-13, "leak at {idx}: {v}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let n = [6, 8, 4];
        let plan = Fft3::for_shape(n);
        let orig: Vec<Complex64> = (0..192)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut data = orig.clone();
        plan.forward(&mut data);
        plan.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
