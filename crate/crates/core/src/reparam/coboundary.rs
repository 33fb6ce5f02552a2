use super::{ReparamFlow, TorusPoint};
use crate::observables::TorusObservable;
use rayon::prelude::*;

/// `psi = -g + (1/N) sum_{k=1}^{N} g o T_k`, which equals `h - h o T_1` for
/// `h = -sum_{i<N} (N - i)/N g o T_i`.
#[derive(Debug, Clone)]
pub struct Coboundary<'a> {
    flow: &'a ReparamFlow,
    g: TorusObservable,
    n: usize,
}

impl<'a> Coboundary<'a> {
    /// `g` is recentred to `v dLeb`-mean zero.
    pub fn new(flow: &'a ReparamFlow, g: TorusObservable, n: usize) -> Self {
        let g = g.centred(flow.time_change());
        Coboundary { flow, g, n: n.max(1) }
    }

    pub fn g(&self) -> &TorusObservable {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `g(T_k x)` for `k = 0..len`.
    pub fn series(&self, x: &TorusPoint, len: usize) -> Vec<f64> {
        (0..len)
            .into_par_iter()
            .map(|k| {
                let y = self.flow.evaluate(k as f64, x);
                self.g.value(y.x1, y.x2)
            })
            .collect()
    }

    pub fn psi(&self, x: &TorusPoint) -> f64 {
        let s = self.series(x, self.n + 1);
        -s[0] + s[1..].iter().sum::<f64>() / self.n as f64
    }

    pub fn transfer(&self, x: &TorusPoint) -> f64 {
        let s = self.series(x, self.n);
        transfer_from(&s, 0, self.n)
    }

    /// `psi(T_k x)` and `h(T_k x)` for `k = 0..len`, from one orbit series.
    pub fn along_orbit(&self, x: &TorusPoint, len: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let g = self.series(x, len + n + 1);
        let mut prefix = vec![0.0; g.len() + 1];
        for (i, v) in g.iter().enumerate() {
            prefix[i + 1] = prefix[i] + v;
        }
        let psi = (0..len).map(|k| -g[k] + (prefix[k + n + 1] - prefix[k + 1]) / n as f64).collect();
        let h = (0..len).map(|k| transfer_from(&g, k, n)).collect();
        (psi, h)
    }

    /// `sup |psi + g|` over a `k x k` grid of cell centres.
    pub fn certificate(&self, k: usize) -> f64 {
        (0..k * k)
            .into_par_iter()
            .map(|c| {
                let x = TorusPoint::new(((c / k) as f64 + 0.5) / k as f64, ((c % k) as f64 + 0.5) / k as f64);
                let s = self.series(&x, self.n + 1);
                (s[1..].iter().sum::<f64>() / self.n as f64).abs()
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn transfer_from(g: &[f64], k: usize, n: usize) -> f64 {
    -(0..n).map(|i| (n - i) as f64 / n as f64 * g[k + i]).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::TimeChange;
    use crate::rotation::RotationNumber;
    use num_complex::Complex;

    fn flow() -> ReparamFlow {
        let v = TimeChange::new(vec![(2, 0, Complex::new(0.2, 0.0)), (2, 1, Complex::new(0.1, 0.1))]).unwrap();
        ReparamFlow::new(RotationNumber::golden(), v)
    }

    #[test]
    fn one_term_identity() {
        let f = flow();
        let c = Coboundary::new(&f, TorusObservable::cos_x1(), 1);
        let x = TorusPoint::new(0.3, 0.6);
        let y = f.evaluate(1.0, &x);
        let g = c.g().clone();
        assert!((c.psi(&x) - (g.value(y.x1, y.x2) - g.value(x.x1, x.x2))).abs() < 1e-14);
        assert!((c.transfer(&x) + g.value(x.x1, x.x2)).abs() < 1e-14);
    }

    #[test]
    fn zero_observable() {
        let f = flow();
        let c = Coboundary::new(&f, TorusObservable::zero(), 7);
        assert_eq!(c.psi(&TorusPoint::new(0.2, 0.2)), 0.0);
    }

    #[test]
    fn telescopes() {
        let f = flow();
        let c = Coboundary::new(&f, TorusObservable::cos_x1(), 20);
        let x = TorusPoint::new(0.1, 0.7);
        let (psi, h) = c.along_orbit(&x, 200);
        let mut s = 0.0;
        for m in 1..200 {
            s += psi[m - 1];
            assert!((s - (h[0] - h[m])).abs() < 1e-10, "m={m}");
        }
        assert!((psi[5] - c.psi(&f.evaluate(5.0, &x))).abs() < 1e-9);
    }
}
