//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use sbfem_seepage::geometry::Point2;
use sbfem_seepage::model::Material;
use sbfem_seepage::sbfem::{eigenvalues, build_hamiltonian, SElementOperator};
use std::f64::consts::TAU;
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Gauss-Legendre rule on [-1, 1] from the Jacobi matrix (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Area and centroid by the shoelace formula.
pub fn area_centroid(pts: &[Point2]) -> (f64, Point2) {
    let n = pts.len();
    // Shoelace about the mean vertex, so small polygons far from the origin keep their digits.
    let ox = pts.iter().map(|p| p.x).sum::<f64>() / n as f64;
    let oy = pts.iter().map(|p| p.y).sum::<f64>() / n as f64;
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (px, py) = (pts[i].x - ox, pts[i].y - oy);
        let (qx, qy) = (pts[(i + 1) % n].x - ox, pts[(i + 1) % n].y - oy);
        let w = px * qy - qx * py;
        a += w;
        cx += (px + qx) * w;
        cy += (py + qy) * w;
    }
    (a / 2.0, Point2::new(ox + cx / (3.0 * a), oy + cy / (3.0 * a)))
}

pub struct Coefficients {
    pub e0: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub m0: DMatrix<f64>,
}

/// Boundary coefficient matrices written out from the scaled-boundary gradient
/// definitions and integrated with an `order`-point rule per edge.
pub fn oracle_coefficients(pts: &[Point2], kx: f64, ky: f64, ss: f64, order: usize) -> Coefficients {
    let n = pts.len();
    let (_, c) = area_centroid(pts);
    let rule = gauss_legendre(order);
    let mut m = Coefficients {
        e0: DMatrix::zeros(n, n),
        e1: DMatrix::zeros(n, n),
        e2: DMatrix::zeros(n, n),
        m0: DMatrix::zeros(n, n),
    };
    for i in 0..n {
        let dofs = [i, (i + 1) % n];
        let (p1, p2) = (pts[dofs[0]] - c, pts[dofs[1]] - c);
        for &(eta, w) in &rule {
            let shape = [(1.0 - eta) / 2.0, (1.0 + eta) / 2.0];
            let dshape = [-0.5, 0.5];
            let xb = shape[0] * p1.x + shape[1] * p2.x;
            let yb = shape[0] * p1.y + shape[1] * p2.y;
            let (xe, ye) = ((p2.x - p1.x) / 2.0, (p2.y - p1.y) / 2.0);
            let jb = xb * ye - yb * xe;
            // grad = b1 d/dxi + b2 d/deta / xi
            let b1 = [ye / jb, -xe / jb];
            let b2 = [-yb / jb, xb / jb];
            let dot = |u: [f64; 2], v: [f64; 2]| kx * u[0] * v[0] + ky * u[1] * v[1];
            for r in 0..2 {
                for s in 0..2 {
                    let (a, b) = (dofs[r], dofs[s]);
                    m.e0[(a, b)] += w * jb * shape[r] * dot(b1, b1) * shape[s];
                    m.e1[(a, b)] += w * jb * dshape[r] * dot(b2, b1) * shape[s];
                    m.e2[(a, b)] += w * jb * dshape[r] * dot(b2, b2) * dshape[s];
                    m.m0[(a, b)] += w * jb * shape[r] * ss * shape[s];
                }
            }
        }
    }
    m
}

/// Stiffness and static-mode (Guyan) mass of a polygon seen as `rings`
/// concentric layers of bilinear finite elements around the centroid,
/// condensed onto the boundary nodes one ring at a time. Both converge to the
/// S-element matrices at second order in the ring spacing.
pub fn fem_condensed(pts: &[Point2], kx: f64, ky: f64, ss: f64, rings: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = pts.len();
    let (_, c) = area_centroid(pts);
    let rel: Vec<Point2> = pts.iter().map(|p| *p - c).collect();
    let gs = gauss_legendre(6);
    let ge = gauss_legendre(3);
    let mut s_eff = DMatrix::<f64>::zeros(1, 1);
    let mut g_eff = DMatrix::<f64>::zeros(1, 1);
    for k in 0..rings {
        let (xa, xb) = (k as f64 / rings as f64, (k + 1) as f64 / rings as f64);
        // Inner ring collapses to the single center node on the first layer.
        let inner = if k == 0 { 1 } else { n };
        let size = inner + n;
        let mut a = DMatrix::zeros(size, size);
        let mut b = DMatrix::zeros(size, size);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p1, p2) = (rel[i], rel[j]);
            let dofs = if k == 0 { [0, 0, 1 + i, 1 + j] } else { [i, j, n + i, n + j] };
            for &(s, ws) in &gs {
                let xi = xa * (1.0 - s) / 2.0 + xb * (1.0 + s) / 2.0;
                let dxi = (xb - xa) / 2.0;
                for &(eta, we) in &ge {
                    let nn = [(1.0 - eta) / 2.0, (1.0 + eta) / 2.0];
                    let la = [(1.0 - s) / 2.0, (1.0 + s) / 2.0];
                    let f = [la[0] * nn[0], la[0] * nn[1], la[1] * nn[0], la[1] * nn[1]];
                    let fs = [-0.5 * nn[0], -0.5 * nn[1], 0.5 * nn[0], 0.5 * nn[1]];
                    let fe = [-0.5 * la[0], 0.5 * la[0], -0.5 * la[1], 0.5 * la[1]];
                    let bx = nn[0] * p1.x + nn[1] * p2.x;
                    let by = nn[0] * p1.y + nn[1] * p2.y;
                    // rows: d/ds, d/deta of (x, y)
                    let j11 = dxi * bx;
                    let j12 = dxi * by;
                    let j21 = xi * (p2.x - p1.x) / 2.0;
                    let j22 = xi * (p2.y - p1.y) / 2.0;
                    let det = j11 * j22 - j12 * j21;
                    let w = ws * we * det;
                    let grad: Vec<[f64; 2]> = (0..4)
                        .map(|q| {
                            [
                                (j22 * fs[q] - j12 * fe[q]) / det,
                                (-j21 * fs[q] + j11 * fe[q]) / det,
                            ]
                        })
                        .collect();
                    for r in 0..4 {
                        for q in 0..4 {
                            a[(dofs[r], dofs[q])] += w * (kx * grad[r][0] * grad[q][0] + ky * grad[r][1] * grad[q][1]);
                            b[(dofs[r], dofs[q])] += w * ss * f[r] * f[q];
                        }
                    }
                }
            }
        }
        let a11 = a.view((0, 0), (inner, inner)) + &s_eff;
        let b11 = b.view((0, 0), (inner, inner)) + &g_eff;
        let a12 = a.view((0, inner), (inner, n)).into_owned();
        let a21 = a.view((inner, 0), (n, inner)).into_owned();
        let b12 = b.view((0, inner), (inner, n)).into_owned();
        let b21 = b.view((inner, 0), (n, inner)).into_owned();
        let t = -a11.clone().lu().solve(&a12).expect("interior block is regular");
        s_eff = a.view((inner, inner), (n, n)) + &a21 * &t;
        g_eff = b.view((inner, inner), (n, n)) + &b21 * &t + t.transpose() * &b12 + t.transpose() * &b11 * &t;
    }
    (s_eff, g_eff)
}

/// Richardson extrapolation of [`fem_condensed`] from `rings` and `2 rings`.
pub fn fem_condensed_extrapolated(pts: &[Point2], kx: f64, ky: f64, ss: f64, rings: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (k1, m1) = fem_condensed(pts, kx, ky, ss, rings);
    let (k2, m2) = fem_condensed(pts, kx, ky, ss, 2 * rings);
    ((k2 * 4.0 - k1) / 3.0, (m2 * 4.0 - m1) / 3.0)
}

#[derive(Debug, Clone)]
pub struct RandomElement {
    pub points: Vec<Point2>,
    pub kx: f64,
    pub ky: f64,
    pub ss: f64,
}

impl RandomElement {
    pub fn material(&self) -> Material {
        Material::new(self.kx, self.ky, self.ss)
    }
}

/// Star-convex polygons with 3 to 8 vertices, placed, rotated and scaled at random,
/// with conductivities in [0.1, 10] and storage in [0, 1].
pub fn star_convex_element() -> impl Strategy<Value = RandomElement> {
    (3usize..=8)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1.0..1.6f64, n),
                prop::collection::vec(0.6..1.0f64, n),
                0.0..TAU,
                0.05..20.0f64,
                (-50.0..50.0f64, -50.0..50.0f64),
                (0.1..10.0f64, 0.1..10.0f64, 0.0..1.0f64),
            )
        })
        .prop_map(|(gaps, radii, phase, scale, (ox, oy), (kx, ky, ss))| {
            let total: f64 = gaps.iter().sum();
            let mut angle = phase;
            let points = gaps
                .iter()
                .zip(&radii)
                .map(|(g, r)| {
                    let p = Point2::new(ox + scale * r * angle.cos(), oy + scale * r * angle.sin());
                    angle += TAU * g / total;
                    p
                })
                .collect();
            RandomElement { points, kx, ky, ss }
        })
}

/// Measured element invariants; [`ElementInvariants::failures`] lists violated ones.
#[derive(Debug, Clone)]
pub struct ElementInvariants {
    pub e0_min_eig: f64,
    pub e2_min_eig: f64,
    pub pairing: f64,
    pub k_asymmetry: f64,
    pub k_min_eig: f64,
    pub k_constant_residual: f64,
    pub k_second_eig: f64,
    pub mass_residual: f64,
    pub mass_sum_error: f64,
}

fn sym_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// All values are relative to the natural scale of the matrix involved.
pub fn element_invariants(op: &SElementOperator, e: &RandomElement) -> ElementInvariants {
    let c = &op.coefficients;
    let n = op.num_nodes();
    let e0 = sym_eigs(&c.e0);
    let e2 = sym_eigs(&c.e2);
    let lambda = eigenvalues(&build_hamiltonian(c).expect("E0 regular")).expect("spectrum");
    let rho = lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let pairing = lambda
        .iter()
        .map(|l| lambda.iter().map(|m| (l + m).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        / rho;
    let k = &op.stiffness;
    let knorm = k.norm();
    let ke = sym_eigs(k);
    let ones = DVector::from_element(n, 1.0);
    let a = c.e0.clone().cholesky().expect("E0 SPD").solve(&(k - &c.e1).transpose()).transpose();
    let r = &a * &op.mass + &op.mass * a.transpose() + &op.mass * 2.0 - &c.m0;
    let (area, _) = area_centroid(&e.points);
    let target = e.ss * area;
    let total: f64 = op.mass.iter().sum();
    ElementInvariants {
        e0_min_eig: e0[0] / e0[n - 1],
        e2_min_eig: e2[0] / e2[n - 1],
        pairing,
        k_asymmetry: (k - k.transpose()).norm() / knorm,
        k_min_eig: ke[0] / ke[n - 1],
        k_constant_residual: (k * &ones).norm() / knorm,
        k_second_eig: ke[1] / ke[n - 1],
        mass_residual: r.norm() / c.m0.norm().max(f64::MIN_POSITIVE),
        mass_sum_error: if target > 0.0 { (total - target).abs() / target } else { total.abs() },
    }
}

impl ElementInvariants {
    pub fn failures(&self) -> Vec<String> {
        let mut f = Vec::new();
        let mut check = |ok: bool, what: &str, v: f64| {
            if !ok {
                f.push(format!("{what}: {v:e}"));
            }
        };
        check(self.e0_min_eig > 1e-12, "E0 not positive definite", self.e0_min_eig);
        check(self.e2_min_eig > -1e-12, "E2 not semi-definite", self.e2_min_eig);
        check(self.pairing < 1e-8, "eigenvalues not paired", self.pairing);
        check(self.k_asymmetry < 1e-12, "K not symmetric", self.k_asymmetry);
        check(self.k_min_eig > -1e-10, "K not semi-definite", self.k_min_eig);
        check(self.k_constant_residual < 1e-10, "constant not in the kernel of K", self.k_constant_residual);
        check(self.k_second_eig > 1e-8, "kernel of K larger than the constants", self.k_second_eig);
        check(self.mass_residual < 1e-8, "mass equation residual", self.mass_residual);
        check(self.mass_sum_error < 1e-8, "mass does not sum to storage volume", self.mass_sum_error);
        f
    }
}
