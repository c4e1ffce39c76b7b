//! Reference computations that share no code with the library: plain
//! state-vector amplitudes with hand-rolled index arithmetic.

#![allow(dead_code)]

use num_complex::Complex64 as C;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `+1` and `−1` eigenvectors of `n·σ` for a unit vector `n`.
pub fn eigvecs(n: [f64; 3]) -> [[C; 2]; 2] {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let e = C::from_polar(1.0, phi);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [[cx(c, 0.0), e * s], [cx(s, 0.0), -e * c]]
}

fn y_vecs() -> [[C; 2]; 2] {
    [[cx(H, 0.0), cx(0.0, H)], [cx(H, 0.0), cx(0.0, -H)]]
}

fn x_vecs() -> [[C; 2]; 2] {
    [[cx(H, 0.0), cx(H, 0.0)], [cx(H, 0.0), cx(-H, 0.0)]]
}

/// `P(abc | xyz)` for the GHZ state, Y at setting 0 and X at setting 1,
/// indexed `(abc << 3) | xyz`.
pub fn ghz_mermin_table() -> Vec<f64> {
    let mut out = vec![0.0; 64];
    for s in 0..8 {
        let bases: Vec<[[C; 2]; 2]> =
            (0..3).map(|k| if (s >> (2 - k)) & 1 == 0 { y_vecs() } else { x_vecs() }).collect();
        for o in 0..8 {
            let e: Vec<[C; 2]> = (0..3).map(|k| bases[k][(o >> (2 - k)) & 1]).collect();
            // ⟨e|GHZ⟩ = (e0*(0)e1*(0)e2*(0) + e0*(1)e1*(1)e2*(1)) / √2
            let amp = (e[0][0].conj() * e[1][0].conj() * e[2][0].conj()
                + e[0][1].conj() * e[1][1].conj() * e[2][1].conj())
                * H;
            out[(o << 3) | s] = amp.norm_sqr();
        }
    }
    out
}

type M4 = [[C; 4]; 4];
type M2 = [[C; 2]; 2];

fn mul2(a: &M2, b: &M2) -> M2 {
    let mut r = [[C::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Kraus operator of an agent with input `x` and outcome `a`: identity for
/// `x = 0, a = 0`, zero for `x = 0, a = 1`, `|1⟩⟨a|` for `x = 1`.
fn agent(x: usize, a: usize) -> M2 {
    let z = C::default();
    let one = cx(1.0, 0.0);
    match (x, a) {
        (0, 0) => [[one, z], [z, one]],
        (0, _) => [[z, z], [z, z]],
        (_, a) => {
            let mut m = [[z, z], [z, z]];
            m[1][a] = one;
            m
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Control {
    X,
    Z,
}

/// Switch operator on control ⊗ target (index `2c + t`): the first
/// projector's branch runs agent 1 then agent 2.
fn switch(control: Control, e: &M2, f: &M2) -> M4 {
    let (p, q): (M2, M2) = match control {
        Control::X => (
            [[cx(0.5, 0.0), cx(0.5, 0.0)], [cx(0.5, 0.0), cx(0.5, 0.0)]],
            [[cx(0.5, 0.0), cx(-0.5, 0.0)], [cx(-0.5, 0.0), cx(0.5, 0.0)]],
        ),
        Control::Z => (
            [[cx(1.0, 0.0), C::default()], [C::default(), C::default()]],
            [[C::default(), C::default()], [C::default(), cx(1.0, 0.0)]],
        ),
    };
    let fe = mul2(f, e);
    let ef = mul2(e, f);
    let mut w = [[C::default(); 4]; 4];
    for c1 in 0..2 {
        for c2 in 0..2 {
            for t1 in 0..2 {
                for t2 in 0..2 {
                    w[c1 * 2 + t1][c2 * 2 + t2] = p[c1][c2] * fe[t1][t2] + q[c1][c2] * ef[t1][t2];
                }
            }
        }
    }
    w
}

/// The functional `c ↦ (⟨fin| ⊗ ⟨t|) W (|c⟩ ⊗ |0⟩)` of one switch wing.
fn wing(control: Control, x: [usize; 2], a: [usize; 2], fin: &[C; 2], t: usize) -> [C; 2] {
    let w = switch(control, &agent(x[0], a[0]), &agent(x[1], a[1]));
    let mut g = [C::default(); 2];
    for (c, gc) in g.iter_mut().enumerate() {
        for cp in 0..2 {
            *gc += fin[cp].conj() * w[cp * 2 + t][c * 2];
        }
    }
    g
}

/// `P(a1 a2 a3 b1 b2 b3 c1 c2 c3 | x1 x2 y1 y2 z1 z2)` for three
/// X-controlled switches on a GHZ control state, controls read out in the
/// Y basis. Indexed `(outputs << 6) | settings`, first variable most
/// significant.
pub fn three_switch_table() -> Vec<f64> {
    let ys = y_vecs();
    let mut out = vec![0.0; 1 << 15];
    for s in 0..64usize {
        let xs: Vec<[usize; 2]> = (0..3).map(|k| [(s >> (5 - 2 * k)) & 1, (s >> (4 - 2 * k)) & 1]).collect();
        for o in 0..512usize {
            let outs: Vec<[usize; 3]> =
                (0..3).map(|k| [(o >> (8 - 3 * k)) & 1, (o >> (7 - 3 * k)) & 1, (o >> (6 - 3 * k)) & 1]).collect();
            let mut p = 0.0;
            for t in 0..8usize {
                let g: Vec<[C; 2]> = (0..3)
                    .map(|k| wing(Control::X, xs[k], [outs[k][0], outs[k][1]], &ys[outs[k][2]], (t >> (2 - k)) & 1))
                    .collect();
                let amp = (g[0][0] * g[1][0] * g[2][0] + g[0][1] * g[1][1] * g[2][1]) * H;
                p += amp.norm_sqr();
            }
            out[(o << 6) | s] = p;
        }
    }
    out
}

/// The measurement chain for `N` links: `2N + 2` unit vectors, consecutive
/// ones at angle `θ = π/(N + 1)`, the first along Z and the second in the
/// Z–X plane, polar angles increasing evenly to `π − θ`.
pub fn spiral_chain(n: usize) -> Vec<[f64; 3]> {
    use std::f64::consts::PI;
    let theta = PI / (n + 1) as f64;
    let polar = |k: usize| if k == 0 { 0.0 } else { theta + (k - 1) as f64 * (PI - 2.0 * theta) / (2 * n) as f64 };
    let mut phi = 0.0;
    let mut out = Vec::new();
    for k in 0..2 * n + 2 {
        if k >= 2 {
            let (p0, p1) = (polar(k - 1), polar(k));
            // Spherical law of cosines for the azimuth step.
            phi += ((theta.cos() - p0.cos() * p1.cos()) / (p0.sin() * p1.sin())).clamp(-1.0, 1.0).acos();
        }
        let z = polar(k);
        out.push([z.sin() * phi.cos(), z.sin() * phi.sin(), z.cos()]);
    }
    out
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `P(a1 a2 a3 b | x1 x2 x3 y)` for the Z-controlled switch whose control
/// shares `Φ⁺` with an ancilla. Indexed `out · 4k² + ((x1·2 + x2)·k + x3)·k + y`
/// with `k = N + 1`.
pub fn chained_table(n: usize) -> Vec<f64> {
    let k = n + 1;
    let chain = spiral_chain(n);
    let a_vecs: Vec<M2> = (0..k).map(|j| eigvecs(chain[2 * j])).collect();
    let b_vecs: Vec<M2> = (0..k)
        .map(|i| {
            let [x, y, z] = chain[2 * i + 1];
            eigvecs([x, -y, z])
        })
        .collect();
    let mut out = vec![0.0; 16 * 4 * k * k];
    for x12 in 0..4 {
        let x = [x12 >> 1, x12 & 1];
        for x3 in 0..k {
            for y in 0..k {
                for o in 0..16 {
                    let (a1, a2, a3, b) = (o >> 3, (o >> 2) & 1, (o >> 1) & 1, o & 1);
                    let mut p = 0.0;
                    for t in 0..2 {
                        let g = wing(Control::Z, x, [a1, a2], &a_vecs[x3][a3], t);
                        let e = b_vecs[y][b];
                        // Φ⁺ = (|00⟩ + |11⟩)/√2 on (control, ancilla).
                        let amp = (g[0] * e[0].conj() + g[1] * e[1].conj()) * H;
                        p += amp.norm_sqr();
                    }
                    out[o * 4 * k * k + (x12 * k + x3) * k + y] = p;
                }
            }
        }
    }
    out
}

/// `P(a = b | x3, y)` from the chain geometry alone: the Z measurement at
/// `x3 = 0`, chain vectors elsewhere.
pub fn chain_equal_prob(chain: &[[f64; 3]], x3: usize, y: usize) -> f64 {
    (1.0 + dot(chain[2 * x3], chain[2 * y + 1])) / 2.0
}

pub fn chain_bc_from_geometry(n: usize) -> f64 {
    let chain = spiral_chain(n);
    let r = |x, y| chain_equal_prob(&chain, x, y);
    let mut s = 0.0;
    for i in 0..n {
        s += r(i, i) + r(i + 1, i);
    }
    s + r(n, n) - r(0, n)
}

/// Max over deterministic `a(x3), b(y)` of the chained expression, by
/// plain nested enumeration.
pub fn deterministic_bc_max(n: usize) -> i64 {
    let k = n + 1;
    let mut best = i64::MIN;
    for am in 0..1u32 << k {
        for bm in 0..1u32 << k {
            let a: Vec<u32> = (0..k).map(|i| (am >> i) & 1).collect();
            let b: Vec<u32> = (0..k).map(|i| (bm >> i) & 1).collect();
            let eq = |x: usize, y: usize| i64::from(a[x] == b[y]);
            let mut s = 0;
            for i in 0..n {
                s += eq(i, i) + eq(i + 1, i);
            }
            best = best.max(s + eq(n, n) - eq(0, n));
        }
    }
    best
}

/// `(max satisfied, number satisfying all)` of the four parity constraints
/// over assignments of `λA λB λC a3 b3 c3`.
pub fn parity_system_counts() -> (usize, usize) {
    let mut best = 0;
    let mut all = 0;
    for m in 0..64u32 {
        let v: Vec<u32> = (0..6).map(|i| (m >> i) & 1).collect();
        let (la, lb, lc, a3, b3, c3) = (v[0], v[1], v[2], v[3], v[4], v[5]);
        let sat =
            [la ^ lb ^ lc == 0, la ^ b3 ^ c3 == 1, a3 ^ lb ^ c3 == 1, a3 ^ b3 ^ lc == 1].iter().filter(|&&b| b).count();
        best = best.max(sat);
        all += usize::from(sat == 4);
    }
    (best, all)
}
