//! An element-by-element dense assembly of one Picard iteration on the flat
//! substrate, written directly from the weak form, compared against the
//! production banded assembly by solution vectors.

use nalgebra::{DMatrix, DVector};

use ssd_core::anisotropy::Anisotropy;
use ssd_core::geometry::PolygonalCurve;
use ssd_core::linalg::linear_solve;
use ssd_core::scheme::{Iterate, SchemeParams, SchemeState, SchemeVariant, StepContext};
use ssd_core::substrate::Line;
use ssd_core::vec2::Vec2;

const SIGMA: f64 = -0.866_025_403_784_438_6;
const ETA: f64 = 100.0;
const DT: f64 = 1e-3;

fn perp(v: [f64; 2]) -> [f64; 2] {
    [v[1], -v[0]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// γ, ∇γ and k for the two built-in densities, from their closed forms.
fn density(name: &str, p: [f64; 2]) -> (f64, [f64; 2], f64) {
    match name {
        "isotropic" => {
            let g = dot(p, p).sqrt();
            (g, [p[0] / g, p[1] / g], 2.0)
        }
        "l4" => {
            let g = (p[0].powi(4) + p[1].powi(4)).powf(0.25);
            let g3 = g * g * g;
            (g, [p[0].powi(3) / g3, p[1].powi(3) / g3], 2.0 / g3)
        }
        _ => unreachable!(),
    }
}

/// `Z` applied to `v` for unit normal `n`.
fn z_apply(name: &str, n: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    let (g, xi, k) = density(name, n);
    let nv = dot(n, v);
    let xv = dot(xi, v);
    [g * v[0] - n[0] * xv - xi[0] * nv + k * n[0] * nv, g * v[1] - n[1] * xv - xi[1] * nv + k * n[1] * nv]
}

struct Solution {
    x: Vec<[f64; 2]>,
    mu: Vec<f64>,
    c_l: f64,
    c_r: f64,
}

/// Unknown layout: x_0..x_N, y_0..y_N, μ_0..μ_N, c_l, c_r.
fn reference_solve(old: &[[f64; 2]], c_old: (f64, f64), it: &[[f64; 2]], name: &str) -> Solution {
    let n = old.len() - 1;
    let h = 1.0 / n as f64;
    let dim = 3 * n + 5;
    let (ix, iy, imu, icl, icr) = (|i| i, |i| n + 1 + i, |i| 2 * (n + 1) + i, 3 * n + 3, 3 * n + 4);
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);

    // rows: first equation per node, then the vector equation, then attachment
    let row_kin = |i: usize| i;
    let row_curv = |i: usize, comp: usize| n + 1 + 2 * i + comp;
    let row_att = [3 * n + 3, 3 * n + 4];
    // the vector equation has 2(N+1) rows, of which the y-components at the
    // contact nodes are replaced by the second attachment row per node
    for j in 1..=n {
        let (p, q) = (j - 1, j);
        let am = [old[q][0] - old[p][0], old[q][1] - old[p][1]];
        let bl = [it[q][0] - it[p][0], it[q][1] - it[p][1]];
        let len = dot(am, am).sqrt();
        let xrho_old = len / h;
        // n^{m+1/2} |X^m_ρ|
        let nw = perp([(am[0] + bl[0]) / h, (am[1] + bl[1]) / h]);
        let nw = [-0.5 * nw[0], -0.5 * nw[1]];
        let normal_old = { let t = perp(am); [-t[0] / len, -t[1] / len] };
        for (node, sign) in [(p, -1.0), (q, 1.0)] {
            // kinematic: (1/Δt) lumped (X − X^m)·n |X_ρ| φ + μ_ρ φ_ρ / |X_ρ|
            let r = row_kin(node);
            let w = 0.5 * h / DT;
            a[(r, ix(node))] += w * nw[0];
            a[(r, iy(node))] += w * nw[1];
            b[r] += w * dot(nw, old[node]);
            let s = sign / h * h / xrho_old / h;
            a[(r, imu(q))] += s;
            a[(r, imu(p))] -= s;
            // curvature, tested with φ_node e_comp
            for comp in 0..2 {
                if (node == 0 || node == n) && comp == 1 {
                    continue;
                }
                let r = row_curv(node, comp);
                a[(r, imu(node))] += 0.5 * h * nw[comp];
                // −Z(n^m) X_ρ · e ζ_ρ h / |X^m_ρ|
                let e = if comp == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                for (dof, coef) in [(q, 1.0 / h), (p, -1.0 / h)] {
                    for d in 0..2 {
                        let ed = if d == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                        let zed = z_apply(name, normal_old, ed);
                        let col = if d == 0 { ix(dof) } else { iy(dof) };
                        a[(r, col)] -= coef * dot(zed, e) * (sign / h) * h / xrho_old;
                    }
                }
            }
        }
    }
    // contact terms, with G = e_x on the line
    let inv = 1.0 / (ETA * DT);
    let rl = row_curv(0, 0);
    a[(rl, icl)] -= inv;
    b[rl] += SIGMA - inv * c_old.0;
    let rr = row_curv(n, 0);
    a[(rr, icr)] -= inv;
    b[rr] += -SIGMA - inv * c_old.1;
    // attachment X(0) = (c_l, 0), X(1) = (c_r, 0); reuse the skipped y rows
    let row_y0 = row_curv(0, 1);
    let row_yn = row_curv(n, 1);
    a[(row_y0, iy(0))] = 1.0;
    a[(row_yn, iy(n))] = 1.0;
    a[(row_att[0], ix(0))] = 1.0;
    a[(row_att[0], icl)] = -1.0;
    a[(row_att[1], ix(n))] = 1.0;
    a[(row_att[1], icr)] = -1.0;

    let u = a.lu().solve(&b).expect("nonsingular");
    Solution {
        x: (0..=n).map(|i| [u[ix(i)], u[iy(i)]]).collect(),
        mu: (0..=n).map(|i| u[imu(i)]).collect(),
        c_l: u[icl],
        c_r: u[icr],
    }
}

fn case(name: &str, variant: SchemeVariant) -> f64 {
    let n = 10;
    let (c_l, c_r) = (-2.0, 2.0);
    let old: Vec<[f64; 2]> = (0..=n)
        .map(|j| {
            let s = j as f64 / n as f64;
            let x = c_l + (c_r - c_l) * s + 0.05 * (7.0 * s).sin();
            let y = (std::f64::consts::PI * s).sin() * (1.0 + 0.1 * (3.0 * j as f64).cos());
            [if j == 0 { c_l } else if j == n { c_r } else { x }, if j == 0 || j == n { 0.0 } else { y }]
        })
        .collect();
    let mu: Vec<f64> = (0..=n).map(|j| 0.3 * (j as f64).cos()).collect();
    let state = SchemeState::new(
        PolygonalCurve::new(old.iter().map(|p| Vec2::new(p[0], p[1])).collect()).unwrap(),
        mu,
        c_l,
        c_r,
        0.0,
    )
    .unwrap();

    // a Picard iterate away from the old curve
    let (il, ir) = (c_l + 3e-3, c_r - 2e-3);
    let it: Vec<[f64; 2]> = old
        .iter()
        .enumerate()
        .map(|(j, p)| match j {
            0 => [il, 0.0],
            j if j == n => [ir, 0.0],
            j => [p[0] + 1e-2 * (j as f64).sin(), p[1] - 2e-2 * (j as f64 * 0.7).cos()],
        })
        .collect();

    let sub = Line::horizontal();
    let aniso = Anisotropy::<f64>::by_name(name).unwrap();
    let params = SchemeParams { sigma: SIGMA, eta: ETA, dt: DT };
    let ctx = StepContext::new(&state, &aniso, &sub, params, variant, 1e-13).unwrap();
    let mut iterate = Iterate::from_state(&state);
    iterate.nodes = it.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    iterate.c_l = il;
    iterate.c_r = ir;
    let sys = ctx.assemble(&iterate).unwrap();
    let got = Iterate::from_vector(sys.dofs, &linear_solve(&sys.matrix, &sys.rhs).unwrap());

    let want = reference_solve(&old, (c_l, c_r), &it, name);
    let mut diff: f64 = (got.c_l - want.c_l).abs().max((got.c_r - want.c_r).abs());
    for i in 0..=n {
        diff = diff.max((got.nodes[i].x - want.x[i][0]).abs());
        diff = diff.max((got.nodes[i].y - want.x[i][1]).abs());
        diff = diff.max((got.mu[i] - want.mu[i]).abs());
    }
    diff
}

#[test]
fn isotropic_solution_matches() {
    for variant in [SchemeVariant::Corrected, SchemeVariant::Uncorrected] {
        let d = case("isotropic", variant);
        assert!(d < 1e-10, "{variant:?}: {d:e}");
    }
}

#[test]
fn anisotropic_solution_matches() {
    for variant in [SchemeVariant::Corrected, SchemeVariant::Uncorrected] {
        let d = case("l4", variant);
        assert!(d < 1e-10, "{variant:?}: {d:e}");
    }
}
