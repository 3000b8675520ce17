//! Phase-domain nodal solve of the two-source line, independent of the
//! sequence-network solver.

#![allow(dead_code)]

use num_complex::Complex64;
use vied_testkit::{FaultScenario, FaultType, LineModel, ThreePhase};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Dense complex solve by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        assert!(a[p][col].norm() > 1e-14, "singular system");
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == c(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Modified nodal analysis over three-phase buses. Node `None` is ground.
struct Mna {
    nodes: usize,
    branches: Vec<Branch>,
}

struct Branch {
    from: Vec<Option<usize>>,
    to: Vec<Option<usize>>,
    z: Vec<Vec<C>>,
    emf: Vec<C>,
}

impl Mna {
    /// Adds `V_from − V_to = Z·I − E` for a group of coupled conductors and
    /// returns the index of its first current unknown.
    fn branch(&mut self, from: Vec<Option<usize>>, to: Vec<Option<usize>>, z: Vec<Vec<C>>, emf: Vec<C>) -> usize {
        let first: usize = self.branches.iter().map(|b| b.from.len()).sum();
        self.branches.push(Branch { from, to, z, emf });
        first
    }

    fn solve(&self) -> Vec<C> {
        let currents: usize = self.branches.iter().map(|b| b.from.len()).sum();
        let n = self.nodes + currents;
        let mut a = vec![vec![c(0.0, 0.0); n]; n];
        let mut rhs = vec![c(0.0, 0.0); n];
        let mut k = self.nodes;
        for b in &self.branches {
            for j in 0..b.from.len() {
                let row = k + j;
                // KCL: current leaves `from`, enters `to`.
                if let Some(f) = b.from[j] {
                    a[f][row] -= c(1.0, 0.0);
                    a[row][f] += c(1.0, 0.0);
                }
                if let Some(t) = b.to[j] {
                    a[t][row] += c(1.0, 0.0);
                    a[row][t] -= c(1.0, 0.0);
                }
                for m in 0..b.from.len() {
                    a[row][k + m] -= b.z[j][m];
                }
                rhs[row] = -b.emf[j];
            }
            k += b.from.len();
        }
        solve(a, rhs)
    }
}

fn coupled(z1: C, z0: C) -> Vec<Vec<C>> {
    let s = (z0 + 2.0 * z1) / 3.0;
    let m = (z0 - z1) / 3.0;
    (0..3).map(|i| (0..3).map(|j| if i == j { s } else { m }).collect()).collect()
}

fn phases(e: C) -> Vec<C> {
    (0..3).map(|k| e * C::from_polar(1.0, -120f64.to_radians() * k as f64)).collect()
}

pub fn nodal(line: &LineModel, sc: Option<&FaultScenario>) -> ThreePhase {
    const S: usize = 0;
    const F: usize = 3;
    const R: usize = 6;
    let bus = |base: usize| (0..3).map(|k| Some(base + k)).collect::<Vec<_>>();
    let ground = vec![None; 3];
    let zero = vec![c(0.0, 0.0); 3];
    let m = sc.map_or(0.5, |s| s.location_fraction);
    let mut net = Mna { nodes: 9, branches: Vec::new() };

    // Sources drive current from ground into their bus.
    let s = &line.source_s;
    let r = &line.source_r;
    net.branch(ground.clone(), bus(S), coupled(s.z1_ohm, s.z0_ohm), phases(s.emf()));
    let relay = net.branch(bus(S), bus(F), coupled(line.z1() * m, line.z0() * m), zero.clone());
    net.branch(bus(F), bus(R), coupled(line.z1() * (1.0 - m), line.z0() * (1.0 - m)), zero.clone());
    net.branch(ground.clone(), bus(R), coupled(r.z1_ohm, r.z0_ohm), phases(r.emf()));

    if let Some(sc) = sc {
        let rf = c(sc.resistance_ohm, 0.0);
        let mut scalar = |from: Option<usize>, to: Option<usize>, z: C| {
            net.branch(vec![from], vec![to], vec![vec![z]], vec![c(0.0, 0.0)]);
        };
        match sc.fault_type {
            FaultType::AG => scalar(Some(F), None, rf),
            FaultType::BC => scalar(Some(F + 1), Some(F + 2), rf),
            FaultType::BCG => {
                scalar(Some(F + 1), Some(F + 2), c(0.0, 0.0));
                scalar(Some(F + 2), None, rf);
            }
            FaultType::ABC => {
                for k in 0..3 {
                    scalar(Some(F + k), None, rf);
                }
            }
        }
    }
    let x = net.solve();
    ThreePhase {
        v: [x[S], x[S + 1], x[S + 2]],
        i: [x[9 + relay], x[9 + relay + 1], x[9 + relay + 2]],
    }
}

pub fn relative_error(a: &ThreePhase, b: &ThreePhase) -> f64 {
    let diff = |x: &[C; 3], y: &[C; 3]| {
        let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        x.iter().zip(y).map(|(p, q)| (p - q).norm() / scale).fold(0.0, f64::max)
    };
    diff(&a.v, &b.v).max(diff(&a.i, &b.i))
}
