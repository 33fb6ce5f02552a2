use super::TowerObservable;
use crate::error::{Error, Result};
use crate::flow::{Direction, FlowPoint, SpecialFlow, TowerFn};
use crate::primes::PrimeTable;
use crate::quadrature;
use crate::reparam::{Coboundary, ReparamFlow, TorusPoint};
use crate::roof::{Roof, TimeChange};
use crate::phase::Phase;
use crate::summation::Compensated;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

fn at_prime(p: u64) -> impl Fn(Error) -> Error {
    move |e| Error::AtPrime { prime: p, source: Box::new(e) }
}

/// `sum_{p <= n} psi(T_{z (p - m)}(start)) log p`, stepping the flow from
/// prime to prime.
pub fn prime_orbit_sum<R: Roof<f64>, P: TowerFn + ?Sized>(
    psi: &P,
    flow: &SpecialFlow<f64, R>,
    start: &FlowPoint<f64>,
    primes: &PrimeTable,
    n: u64,
    z: Direction,
    m: u64,
) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    if n > primes.limit() {
        return Err(Error::InsufficientSieveRange(format!("{n} exceeds the sieve limit {}", primes.limit())));
    }
    let mut acc = Compensated::<f64>::new();
    let mut walker = flow.walker(start, z)?;
    for p in primes.primes_in(2, n) {
        let w = (p as f64).ln();
        if p < m {
            let step = flow.evaluate(start, z.sign() * (p as f64 - m as f64)).map_err(at_prime(p))?;
            let h = flow.roof().value(step.point.x).map_err(at_prime(p))?;
            acc.add(w * psi.value(step.point.x, step.point.s, h));
            continue;
        }
        let (y, s, _) = walker.advance_to((p - m) as f64).map_err(at_prime(p))?;
        acc.add(w * psi.value(y, s, walker.height()));
    }
    Ok(acc.value())
}

/// Box partition of the tower `[0,1) x [0, h_max)` into `bins^2` cells plus
/// one tail cell for heights above `h_max`, with the normalised Lebesgue
/// masses of every cell.
#[derive(Debug, Clone, Serialize)]
pub struct BoxGrid {
    pub bins: usize,
    pub h_max: f64,
    pub masses: Vec<f64>,
}

impl BoxGrid {
    pub fn tower<R: Roof<f64> + ?Sized>(roof: &R, bins: usize, h_max: f64) -> Result<Self> {
        Ok(BoxGrid { bins, h_max, masses: tower_cell_masses(roof, bins, h_max)? })
    }

    pub fn torus(v: &TimeChange<f64>, bins: usize) -> Self {
        BoxGrid { bins, h_max: 1.0, masses: torus_box_masses(v, bins) }
    }

    pub fn cell(&self, x: f64, s: f64) -> usize {
        let b = self.bins;
        if s >= self.h_max {
            return b * b;
        }
        let i = ((x * b as f64) as usize).min(b - 1);
        let j = ((s / self.h_max * b as f64) as usize).min(b - 1);
        i * b + j
    }

    /// Total variation distance between normalised `weights` and the masses.
    pub fn discrepancy(&self, weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return 1.0;
        }
        0.5 * weights.iter().zip(&self.masses).map(|(w, m)| (w / total - m).abs()).sum::<f64>()
    }
}

/// Cell masses of `dy ds / int f` on the tower; the last entry is the tail.
pub fn tower_cell_masses<R: Roof<f64> + ?Sized>(roof: &R, bins: usize, h_max: f64) -> Result<Vec<f64>> {
    let ds = h_max / bins as f64;
    let norm = roof.integral();
    let cells: Vec<Result<f64>> = (0..bins * bins)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / bins, c % bins);
            let sj = j as f64 * ds;
            let piece = |y: Phase| -> f64 {
                match roof.value(y) {
                    Ok(h) => (h - sj).clamp(0.0, ds),
                    Err(_) => ds,
                }
            };
            let w = 1.0 / bins as f64;
            let val = if i == 0 {
                quadrature::integrate(|t| 2.0 * t * piece(Phase::from_f64(t * t)), 0.0, w.sqrt(), 1e-14, 1e-10)?
            } else if i == bins - 1 {
                quadrature::integrate(|t| 2.0 * t * piece(-Phase::from_f64(t * t)), 0.0, w.sqrt(), 1e-14, 1e-10)?
            } else {
                quadrature::integrate(|y| piece(Phase::from_f64(y)), i as f64 * w, (i + 1) as f64 * w, 1e-14, 1e-10)?
            };
            Ok(val / norm)
        })
        .collect();
    let mut out = cells.into_iter().collect::<Result<Vec<f64>>>()?;
    let tail = (1.0 - out.iter().sum::<f64>()).max(0.0);
    out.push(tail);
    Ok(out)
}

/// `int_box v dLeb` over a `bins^2` grid of the torus, plus an empty tail.
pub fn torus_box_masses(v: &TimeChange<f64>, bins: usize) -> Vec<f64> {
    let w = 1.0 / bins as f64;
    let seg = |k: i64, i: usize| -> Complex64 {
        if k == 0 {
            return Complex64::new(w, 0.0);
        }
        let e = |x: f64| Complex64::new((TAU * k as f64 * x).cos(), (TAU * k as f64 * x).sin());
        (e((i + 1) as f64 * w) - e(i as f64 * w)) / Complex64::new(0.0, TAU * k as f64)
    };
    let mut out = Vec::with_capacity(bins * bins + 1);
    for i in 0..bins {
        for j in 0..bins {
            let mut m = w * w;
            for &(q, k, a) in v.modes() {
                m += (a * seg(q as i64, i) * seg(k, j)).re;
            }
            out.push(m);
        }
    }
    out.push(0.0);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PntRow {
    pub n: u64,
    pub z: i8,
    pub prime_sum: f64,
    pub integral: f64,
    /// `|prime sum - time integral| / N`, averaged over start points.
    pub d1: f64,
    /// `|time integral - N space average| / N`.
    pub d2: f64,
    /// `|prime sum - N space average| / N`.
    pub d3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PntTable {
    pub space_average: f64,
    pub rows: Vec<PntRow>,
    /// `(N, box discrepancy)` for the forward weighted prime orbit.
    pub boxes: Vec<(u64, f64)>,
}

struct Track {
    sums: Vec<(f64, f64)>,
    boxes: Vec<f64>,
}

impl TowerObservable {
    /// Discrepancies `D1, D2, D3` on the grid for each direction, averaged
    /// over `starts`; box discrepancy of the forward weighted prime orbit.
    pub fn pnt_report<R: Roof<f64>>(
        &self,
        flow: &SpecialFlow<f64, R>,
        starts: &[FlowPoint<f64>],
        grid: &[u64],
        dirs: &[Direction],
        primes: &PrimeTable,
        boxes: Option<&BoxGrid>,
    ) -> Result<PntTable> {
        let mut grid = grid.to_vec();
        grid.sort_unstable();
        let top = *grid.last().ok_or_else(|| Error::InvalidInput("empty N grid".into()))?;
        if top > primes.limit() {
            return Err(Error::InsufficientSieveRange(format!("{top} exceeds the sieve limit {}", primes.limit())));
        }
        let space = self.space_average(flow.roof(), true)?;
        let tasks: Vec<(usize, Direction)> =
            (0..starts.len()).flat_map(|i| dirs.iter().map(move |&z| (i, z))).collect();
        let tracks: Vec<Result<Track>> = tasks
            .par_iter()
            .map(|&(i, z)| {
                let psi: &dyn TowerFn = self;
                let mut walker = flow.walker(&starts[i], z)?.with_integrand(psi);
                let want_boxes = boxes.filter(|_| z == Direction::Forward);
                let mut cells = want_boxes.map(|b| vec![0.0; b.masses.len()]);
                let mut acc = Compensated::<f64>::new();
                let mut sums = Vec::with_capacity(grid.len());
                let mut snaps = Vec::new();
                let mut primes_iter = primes.primes_in(2, top).peekable();
                for &n in &grid {
                    while let Some(&p) = primes_iter.peek() {
                        if p > n {
                            break;
                        }
                        primes_iter.next();
                        let (y, s, _) = walker.advance_to(p as f64).map_err(at_prime(p))?;
                        let w = (p as f64).ln();
                        acc.add(w * self.value(y, s, walker.height()));
                        if let (Some(c), Some(b)) = (cells.as_mut(), want_boxes) {
                            c[b.cell(y.to_f64(), s)] += w;
                        }
                    }
                    walker.advance_to(n as f64)?;
                    sums.push((acc.value(), walker.integral()?));
                    if let (Some(c), Some(b)) = (cells.as_ref(), want_boxes) {
                        snaps.push(b.discrepancy(c));
                    }
                }
                Ok(Track { sums, boxes: snaps })
            })
            .collect();
        let tracks = tracks.into_iter().collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for &z in dirs {
            for (g, &n) in grid.iter().enumerate() {
                let mine: Vec<&Track> = tasks.iter().zip(&tracks).filter(|(t, _)| t.1 == z).map(|(_, tr)| tr).collect();
                let k = mine.len() as f64;
                let nf = n as f64;
                let (mut ps, mut it, mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for tr in &mine {
                    let (p, i) = tr.sums[g];
                    ps += p / k;
                    it += i / k;
                    d1 += (p - i).abs() / nf / k;
                    d2 += (i - nf * space).abs() / nf / k;
                    d3 += (p - nf * space).abs() / nf / k;
                }
                rows.push(PntRow { n, z: z.sign() as i8, prime_sum: ps, integral: it, d1, d2, d3 });
            }
        }
        let mut box_rows = Vec::new();
        let fwd: Vec<&Track> = tasks.iter().zip(&tracks).filter(|(t, _)| t.1 == Direction::Forward).map(|(_, tr)| tr).collect();
        if boxes.is_some() && !fwd.is_empty() {
            for (g, &n) in grid.iter().enumerate() {
                box_rows.push((n, fwd.iter().map(|t| t.boxes[g]).sum::<f64>() / fwd.len() as f64));
            }
        }
        Ok(PntTable { space_average: space, rows, boxes: box_rows })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReparamRow {
    pub n: u64,
    pub prime_sum: f64,
    /// `|sum_{p <= N} psi(T_p x) log p| / N` (the observable has mean zero).
    pub d3: f64,
    pub d3_log: f64,
    /// Largest `|S_M(psi)(x)|` for `M <= N`, and `2 sup |h|` on the orbit.
    pub max_birkhoff: f64,
    pub transfer_bound: f64,
    pub box_discrepancy: Option<f64>,
}

/// Prime sums of a coboundary observable along the reparametrized orbit of
/// `x`, with `D3 log^a N` and optional box discrepancy against `v dLeb`.
pub fn reparam_prime_report(
    cob: &Coboundary<'_>,
    flow: &ReparamFlow,
    x: &TorusPoint,
    primes: &PrimeTable,
    grid: &[u64],
    a: f64,
    boxes: Option<&BoxGrid>,
) -> Result<Vec<ReparamRow>> {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    let top = *grid.last().ok_or_else(|| Error::InvalidInput("empty N grid".into()))?;
    if top > primes.limit() {
        return Err(Error::InsufficientSieveRange(format!("{top} exceeds the sieve limit {}", primes.limit())));
    }
    let (psi, h) = cob.along_orbit(x, top as usize + 1);
    let ps: Vec<u64> = primes.primes_in(2, top).collect();
    let cells: Option<Vec<usize>> = boxes.map(|b| {
        ps.par_iter()
            .map(|&p| {
                let y = flow.evaluate(p as f64, x);
                b.cell(y.x1, y.x2)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut acc = Compensated::<f64>::new();
    let mut birk = 0.0f64;
    let mut birk_max = 0.0f64;
    let mut h_max = h[0].abs();
    let mut m = 0usize;
    let mut k = 0usize;
    let mut counts = boxes.map(|b| vec![0.0; b.masses.len()]);
    for &n in &grid {
        while k < ps.len() && ps[k] <= n {
            acc.add((ps[k] as f64).ln() * psi[ps[k] as usize]);
            if let (Some(c), Some(cl)) = (counts.as_mut(), cells.as_ref()) {
                c[cl[k]] += (ps[k] as f64).ln();
            }
            k += 1;
        }
        while m < n as usize {
            birk += psi[m];
            m += 1;
            birk_max = birk_max.max(birk.abs());
            h_max = h_max.max(h[m].abs());
        }
        let nf = n as f64;
        let d3 = acc.value().abs() / nf;
        rows.push(ReparamRow {
            n,
            prime_sum: acc.value(),
            d3,
            d3_log: d3 * nf.ln().powf(a),
            max_birkhoff: birk_max,
            transfer_bound: 2.0 * h_max,
            box_discrepancy: boxes.zip(counts.as_ref()).map(|(b, c)| b.discrepancy(c)),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roof::{PowerRoof, RoofFunction};
    use crate::rotation::RotationNumber;

    fn setup() -> (SpecialFlow<f64, RoofFunction<f64>>, PrimeTable) {
        let flow = SpecialFlow::new(RoofFunction::Power(PowerRoof::default()), RotationNumber::golden());
        (flow, PrimeTable::build(20_000).unwrap())
    }

    #[test]
    fn constant_observable_gives_theta() {
        let (flow, primes) = setup();
        let p = flow.point(0.3, 0.1).unwrap();
        let one = TowerObservable::constant(1.0);
        for z in [Direction::Forward, Direction::Backward] {
            let v = prime_orbit_sum(&one, &flow, &p, &primes, 10_000, z, 0).unwrap();
            assert!((v - primes.theta(10_000).unwrap()).abs() < 1e-8);
        }
        assert_eq!(prime_orbit_sum(&one, &flow, &p, &primes, 1, Direction::Forward, 0).unwrap(), 0.0);
        let table = one.pnt_report(&flow, &[p], &[1000, 10_000], &[Direction::Forward], &primes, None).unwrap();
        let th = primes.theta(10_000).unwrap();
        assert!((table.rows[1].d1 - (th / 1e4 - 1.0).abs()).abs() < 1e-10);
        assert!(table.rows[1].d2 < 1e-10);
    }

    #[test]
    fn report_matches_direct_sum() {
        let (flow, primes) = setup();
        let p = flow.point(0.61, 0.2).unwrap();
        let o = &TowerObservable::default_bank()[1];
        let table = o.pnt_report(&flow, &[p], &[5000], &[Direction::Backward], &primes, None).unwrap();
        let direct = prime_orbit_sum(o, &flow, &p, &primes, 5000, Direction::Backward, 0).unwrap();
        assert!((table.rows[0].prime_sum - direct).abs() < 1e-8);
        let integral = flow.time_integral(o, &p, 5000.0, Direction::Backward).unwrap();
        assert!((table.rows[0].integral - integral).abs() < 1e-7);
    }

    #[test]
    fn cell_masses_sum_to_one() {
        let roof = RoofFunction::Power(PowerRoof::<f64>::default());
        let m = tower_cell_masses(&roof, 8, 4.0).unwrap();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(m.iter().all(|&v| v >= 0.0));
        let v = TimeChange::new(vec![(1, 1, Complex64::new(0.3, 0.2))]).unwrap();
        let t = torus_box_masses(&v, 8);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
