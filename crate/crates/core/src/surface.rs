//! Parametric surfaces in flat 3-space sampled on structured grids, with
//! finite-difference tensor calculus for the submanifold identities
//! (Gauss, Codazzi, Gauss–Weingarten, Simons, divergence).
//!
//! Grids carry a halo of analytically extended samples so every physical
//! node has full stencils through all derivative levels.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use crate::error::{Error, Result};
use crate::fd;

pub type V3 = [f64; 3];
type Field = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceKind {
    /// Unit square of the plane `z = 0`.
    Plane,
    Sphere {
        radius: f64,
    },
    /// Semi-axes along x, y and z.
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    Torus {
        major: f64,
        minor: f64,
    },
}

impl SurfaceKind {
    pub fn unit_sphere() -> Self {
        SurfaceKind::Sphere { radius: 1.0 }
    }

    /// Torus with `R = 2`, `r = 1`.
    pub fn standard_torus() -> Self {
        SurfaceKind::Torus { major: 2.0, minor: 1.0 }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, SurfaceKind::Plane)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SurfaceKind::Plane => true,
            SurfaceKind::Sphere { radius } => radius > 0.0,
            SurfaceKind::Ellipsoid { a, b, c } => a > 0.0 && b > 0.0 && c > 0.0,
            SurfaceKind::Torus { major, minor } => minor > 0.0 && major > minor,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid surface parameters {self:?}")))
        }
    }

    /// Coordinate patches whose interiors cover the surface away from
    /// parametrization singularities.
    pub fn identity_patches(&self) -> Vec<Patch> {
        match self {
            SurfaceKind::Sphere { .. } | SurfaceKind::Ellipsoid { .. } => vec![Patch::Band, Patch::Rotated],
            SurfaceKind::Plane => vec![Patch::Band],
            SurfaceKind::Torus { .. } => vec![Patch::Full],
        }
    }
}

/// Which coordinate chart of the surface a grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Patch {
    /// Latitude band `|v| ≤ π/3` (the whole square for the plane).
    Band,
    /// Latitude band about the x-axis, covering the z-poles.
    Rotated,
    /// The whole closed surface, with midpoint latitudes on spheres and
    /// ellipsoids so the poles are never sampled; used for quadrature.
    Full,
}

/// Halo width: enough for three nested fourth-order first derivatives.
const PAD: usize = 8;

fn position(kind: &SurfaceKind, patch: Patch, u: f64, v: f64) -> V3 {
    match *kind {
        SurfaceKind::Plane => [u, v, 0.0],
        SurfaceKind::Sphere { radius } => ellipsoid_point(radius, radius, radius, patch, u, v),
        SurfaceKind::Ellipsoid { a, b, c } => ellipsoid_point(a, b, c, patch, u, v),
        SurfaceKind::Torus { major, minor } => {
            let w = major + minor * v.cos();
            [w * u.cos(), w * u.sin(), minor * v.sin()]
        }
    }
}

fn ellipsoid_point(a: f64, b: f64, c: f64, patch: Patch, u: f64, v: f64) -> V3 {
    match patch {
        Patch::Rotated => [a * v.sin(), b * v.cos() * u.cos(), c * v.cos() * u.sin()],
        _ => [a * v.cos() * u.cos(), b * v.cos() * u.sin(), c * v.sin()],
    }
}

#[inline]
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Grid geometry shared by all fields of a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    n_u: usize,
    n_v: usize,
    u0: f64,
    v0: f64,
    du: f64,
    dv: f64,
}

impl Grid {
    fn rows(&self) -> usize {
        self.n_u + 2 * PAD
    }

    fn cols(&self) -> usize {
        self.n_v + 2 * PAD
    }

    fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    /// Storage index of padded node `(a, b)`, `a = i + PAD`.
    #[inline]
    fn at(&self, a: usize, b: usize) -> usize {
        a * self.cols() + b
    }

    fn coords(&self, k: usize) -> (f64, f64) {
        let a = (k / self.cols()) as f64 - PAD as f64;
        let b = (k % self.cols()) as f64 - PAD as f64;
        (self.u0 + a * self.du, self.v0 + b * self.dv)
    }

    fn physical(&self) -> impl Iterator<Item = usize> + '_ {
        (PAD..PAD + self.n_u).flat_map(move |a| (PAD..PAD + self.n_v).map(move |b| self.at(a, b)))
    }

    /// First derivative along axis 0 (`u`) or 1 (`v`); NaN off the halo.
    fn d(&self, f: &[f64], axis: usize) -> Field {
        let (stride, h) = if axis == 0 {
            (self.cols(), self.du)
        } else {
            (1, self.dv)
        };
        self.stencil(f, axis, |k| fd::d1_strided(f, k, stride) / h)
    }

    fn d2(&self, f: &[f64], axis: usize) -> Field {
        let (stride, h) = if axis == 0 {
            (self.cols(), self.du)
        } else {
            (1, self.dv)
        };
        self.stencil(f, axis, |k| fd::d2_strided(f, k, stride) / (h * h))
    }

    fn stencil(&self, f: &[f64], axis: usize, op: impl Fn(usize) -> f64) -> Field {
        let r = fd::RADIUS;
        (0..f.len())
            .map(|k| {
                let (a, b) = (k / self.cols(), k % self.cols());
                let (idx, lim) = if axis == 0 { (a, self.rows()) } else { (b, self.cols()) };
                if idx < r || idx + r >= lim {
                    f64::NAN
                } else {
                    op(k)
                }
            })
            .collect()
    }
}

/// Sampled surface with metric, second fundamental form (sign
/// `h_ij = −⟨∂_i∂_jΦ, Υ⟩`), mean curvature and Christoffel symbols.
#[derive(Debug, Clone)]
pub struct DiscreteSurface {
    kind: SurfaceKind,
    patch: Patch,
    grid: Grid,
    pos: [Field; 3],
    /// `dphi[i][c]`: component `c` of `∂_iΦ`.
    dphi: [[Field; 3]; 2],
    ddphi: [[[Field; 3]; 2]; 2],
    normal: [Field; 3],
    g: [[Field; 2]; 2],
    ginv: [[Field; 2]; 2],
    h: [[Field; 2]; 2],
    mean: Field,
    area: Field,
    /// `gamma[k][i][j] = Γᵏ_ij`.
    gamma: [[[Field; 2]; 2]; 2],
}

fn arr2<T>(mut f: impl FnMut(usize, usize) -> T) -> [[T; 2]; 2] {
    [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
}

fn arr3<T>(mut f: impl FnMut(usize) -> T) -> [T; 3] {
    [f(0), f(1), f(2)]
}

impl DiscreteSurface {
    /// Samples `patch` of `kind` on an `n_u × n_v` grid of physical nodes.
    pub fn new(kind: SurfaceKind, patch: Patch, n_u: usize, n_v: usize) -> Result<Self> {
        kind.validate()?;
        if n_u < 8 || n_v < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid {n_u}x{n_v} too small (need ≥ 8)"
            )));
        }
        let grid = match (kind, patch) {
            (SurfaceKind::Plane, Patch::Band) => Grid {
                n_u,
                n_v,
                u0: 0.0,
                v0: 0.0,
                du: 1.0 / (n_u - 1) as f64,
                dv: 1.0 / (n_v - 1) as f64,
            },
            (SurfaceKind::Plane, _) => return Err(Error::InvalidParameter("the plane only has the band patch".into())),
            (SurfaceKind::Torus { .. }, Patch::Full) => Grid {
                n_u,
                n_v,
                u0: 0.0,
                v0: 0.0,
                du: TAU / n_u as f64,
                dv: TAU / n_v as f64,
            },
            (SurfaceKind::Torus { .. }, _) => {
                return Err(Error::InvalidParameter("the torus is covered by the full patch".into()))
            }
            (_, Patch::Full) => Grid {
                n_u,
                n_v,
                u0: 0.0,
                v0: -FRAC_PI_2 + 0.5 * PI / n_v as f64,
                du: TAU / n_u as f64,
                dv: PI / n_v as f64,
            },
            (_, _) => Grid {
                n_u,
                n_v,
                u0: 0.0,
                v0: -FRAC_PI_3,
                du: TAU / n_u as f64,
                dv: 2.0 * FRAC_PI_3 / (n_v - 1) as f64,
            },
        };

        let len = grid.len();
        let mut pos = arr3(|_| vec![0.0; len]);
        for k in 0..len {
            let (u, v) = grid.coords(k);
            let p = position(&kind, patch, u, v);
            for c in 0..3 {
                pos[c][k] = p[c];
            }
        }
        let dphi = [arr3(|c| grid.d(&pos[c], 0)), arr3(|c| grid.d(&pos[c], 1))];
        let mixed = arr3(|c| grid.d(&dphi[0][c], 1));
        let ddphi = [
            [arr3(|c| grid.d2(&pos[c], 0)), mixed.clone()],
            [mixed, arr3(|c| grid.d2(&pos[c], 1))],
        ];

        let mut normal = arr3(|_| vec![f64::NAN; len]);
        let mut g = arr2(|_, _| vec![f64::NAN; len]);
        let mut ginv = arr2(|_, _| vec![f64::NAN; len]);
        let mut h = arr2(|_, _| vec![f64::NAN; len]);
        let mut mean = vec![f64::NAN; len];
        let mut area = vec![f64::NAN; len];
        let full_lat = patch == Patch::Full && !matches!(kind, SurfaceKind::Torus { .. });
        for k in 0..len {
            let pu = [dphi[0][0][k], dphi[0][1][k], dphi[0][2][k]];
            let pv = [dphi[1][0][k], dphi[1][1][k], dphi[1][2][k]];
            let mut nrm = cross(pu, pv);
            let len_n = dot(nrm, nrm).sqrt();
            // beyond a pole the latitude parametrization reverses orientation
            let flip = if full_lat && grid.coords(k).1.cos() < 0.0 {
                -1.0
            } else {
                1.0
            };
            for x in nrm.iter_mut() {
                *x *= flip / len_n;
            }
            let gk = [[dot(pu, pu), dot(pu, pv)], [dot(pu, pv), dot(pv, pv)]];
            let det = gk[0][0] * gk[1][1] - gk[0][1] * gk[1][0];
            let gi = [[gk[1][1] / det, -gk[0][1] / det], [-gk[1][0] / det, gk[0][0] / det]];
            let mut hk = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let pij = [ddphi[i][j][0][k], ddphi[i][j][1][k], ddphi[i][j][2][k]];
                    hk[i][j] = -dot(pij, nrm);
                }
            }
            let mut hm = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j][k] = gk[i][j];
                    ginv[i][j][k] = gi[i][j];
                    h[i][j][k] = hk[i][j];
                    hm += gi[i][j] * hk[i][j];
                }
            }
            for c in 0..3 {
                normal[c][k] = nrm[c];
            }
            mean[k] = hm;
            area[k] = det.sqrt();
        }

        // ∂_l g_ij
        let dg: [[[Field; 2]; 2]; 2] = [arr2(|i, j| grid.d(&g[i][j], 0)), arr2(|i, j| grid.d(&g[i][j], 1))];
        let mut gamma = [arr2(|_, _| vec![0.0; len]), arr2(|_, _| vec![0.0; len])];
        for k in 0..len {
            for a in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut s = 0.0;
                        for l in 0..2 {
                            s += ginv[a][l][k] * (dg[i][j][l][k] + dg[j][i][l][k] - dg[l][i][j][k]);
                        }
                        gamma[a][i][j][k] = 0.5 * s;
                    }
                }
            }
        }

        Ok(DiscreteSurface {
            kind,
            patch,
            grid,
            pos,
            dphi,
            ddphi,
            normal,
            g,
            ginv,
            h,
            mean,
            area,
            gamma,
        })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn patch(&self) -> Patch {
        self.patch
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.grid.n_u, self.grid.n_v)
    }

    /// Physical node indices (into the padded storage).
    pub fn nodes(&self) -> Vec<usize> {
        self.grid.physical().collect()
    }

    pub fn position(&self, k: usize) -> V3 {
        arr3(|c| self.pos[c][k])
    }

    pub fn tangent(&self, i: usize, k: usize) -> V3 {
        arr3(|c| self.dphi[i][c][k])
    }

    pub fn normal(&self, k: usize) -> V3 {
        arr3(|c| self.normal[c][k])
    }

    pub fn metric(&self, k: usize) -> [[f64; 2]; 2] {
        arr2(|i, j| self.g[i][j][k])
    }

    pub fn inverse_metric(&self, k: usize) -> [[f64; 2]; 2] {
        arr2(|i, j| self.ginv[i][j][k])
    }

    pub fn second_form(&self, k: usize) -> [[f64; 2]; 2] {
        arr2(|i, j| self.h[i][j][k])
    }

    pub fn mean_curvature(&self, k: usize) -> f64 {
        self.mean[k]
    }

    /// `|A|² = g^{ik} g^{jl} h_ij h_kl`.
    pub fn norm_a_sq(&self, k: usize) -> f64 {
        let (gi, h) = (self.inverse_metric(k), self.second_form(k));
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        s += gi[i][a] * gi[j][b] * h[i][j] * h[a][b];
                    }
                }
            }
        }
        s
    }

    /// Largest metric distance between grid neighbours.
    pub fn max_spacing(&self) -> f64 {
        self.grid
            .physical()
            .map(|k| {
                let g = self.metric(k);
                (g[0][0].sqrt() * self.grid.du).max(g[1][1].sqrt() * self.grid.dv)
            })
            .fold(0.0, f64::max)
    }

    /// Area element `√det g · du · dv` at node `k`.
    pub fn area_weight(&self, k: usize) -> f64 {
        self.area[k] * self.grid.du * self.grid.dv
    }

    /// `Σ f_k · dA_k` over physical nodes; only meaningful on full patches
    /// of closed surfaces.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.grid.physical().map(|k| f(k) * self.area_weight(k)).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    fn max_over_nodes(&self, f: impl Fn(usize) -> f64) -> Residual {
        let mut max = 0.0f64;
        let mut excluded = 0;
        let mut nodes = 0;
        for k in self.grid.physical() {
            let r = f(k);
            if r.is_finite() {
                max = max.max(r);
                nodes += 1;
            } else {
                excluded += 1;
            }
        }
        Residual { max, nodes, excluded }
    }

    /// Gauss curvature `R_{uvuv} / det g` from the intrinsic curvature tensor.
    pub fn gauss_curvature(&self) -> Field {
        let r = self.riemann_lowered();
        (0..self.grid.len())
            .map(|k| {
                let g = self.metric(k);
                r[0][1][0][1][k] / (g[0][0] * g[1][1] - g[0][1] * g[1][0])
            })
            .collect()
    }

    /// `R_{bljk} = g_{ba} R^a_{ljk}` with
    /// `R^a_{ljk} = ∂_jΓ^a_{kl} − ∂_kΓ^a_{jl} + Γ^a_{jp}Γ^p_{kl} − Γ^a_{kp}Γ^p_{jl}`.
    fn riemann_lowered(&self) -> Vec<Vec<Vec<Vec<Field>>>> {
        let gr = &self.grid;
        let len = gr.len();
        // dgamma[d][a][i][j] = ∂_d Γ^a_ij
        let dgamma: Vec<[[[Field; 2]; 2]; 2]> = (0..2)
            .map(|d| {
                [
                    arr2(|i, j| gr.d(&self.gamma[0][i][j], d)),
                    arr2(|i, j| gr.d(&self.gamma[1][i][j], d)),
                ]
            })
            .collect();
        let mut out = vec![vec![vec![vec![vec![0.0; len]; 2]; 2]; 2]; 2];
        for k in 0..len {
            let gm = |a: usize, i: usize, j: usize| self.gamma[a][i][j][k];
            let mut up = [[[[0.0; 2]; 2]; 2]; 2];
            for a in 0..2 {
                for l in 0..2 {
                    for j in 0..2 {
                        for kk in 0..2 {
                            let mut v = dgamma[j][a][kk][l][k] - dgamma[kk][a][j][l][k];
                            for p in 0..2 {
                                v += gm(a, j, p) * gm(p, kk, l) - gm(a, kk, p) * gm(p, j, l);
                            }
                            up[a][l][j][kk] = v;
                        }
                    }
                }
            }
            for b in 0..2 {
                for l in 0..2 {
                    for j in 0..2 {
                        for kk in 0..2 {
                            out[b][l][j][kk][k] = (0..2).map(|a| self.g[b][a][k] * up[a][l][j][kk]).sum();
                        }
                    }
                }
            }
        }
        out
    }

    /// Max over nodes of `|R_{bljk} − (h_bj h_lk − h_bk h_jl)|`.
    pub fn gauss_residual(&self) -> Residual {
        let r = self.riemann_lowered();
        self.max_over_nodes(|k| {
            let h = self.second_form(k);
            let mut m = 0.0f64;
            for b in 0..2 {
                for l in 0..2 {
                    for j in 0..2 {
                        for kk in 0..2 {
                            let rhs = h[b][j] * h[l][kk] - h[b][kk] * h[j][l];
                            m = m.max((r[b][l][j][kk][k] - rhs).abs());
                        }
                    }
                }
            }
            m
        })
    }

    /// `∇_l h_ij` as `[l][i][j]` fields.
    fn covariant_dh(&self) -> [[[Field; 2]; 2]; 2] {
        let gr = &self.grid;
        let dh: [[[Field; 2]; 2]; 2] = [arr2(|i, j| gr.d(&self.h[i][j], 0)), arr2(|i, j| gr.d(&self.h[i][j], 1))];
        let len = gr.len();
        let mut out = [arr2(|_, _| vec![0.0; len]), arr2(|_, _| vec![0.0; len])];
        for k in 0..len {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut v = dh[l][i][j][k];
                        for p in 0..2 {
                            v -= self.gamma[p][l][i][k] * self.h[p][j][k] + self.gamma[p][l][j][k] * self.h[i][p][k];
                        }
                        out[l][i][j][k] = v;
                    }
                }
            }
        }
        out
    }

    /// Max over nodes of `|∇_i h_jk − ∇_j h_ik|`.
    pub fn codazzi_residual(&self) -> Residual {
        let t = self.covariant_dh();
        self.max_over_nodes(|k| {
            let mut m = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        m = m.max((t[i][j][l][k] - t[j][i][l][k]).abs());
                    }
                }
            }
            m
        })
    }

    /// Residuals of `∂_iΥ = h_iq g^{qp} ∂_pΦ` and
    /// `∂_i∂_jΦ = Γᵏ_ij ∂_kΦ − h_ij Υ`, as `(normal, tangent)` equations.
    pub fn weingarten_residuals(&self) -> (Residual, Residual) {
        let gr = &self.grid;
        let dn = [arr3(|c| gr.d(&self.normal[c], 0)), arr3(|c| gr.d(&self.normal[c], 1))];
        let first = self.max_over_nodes(|k| {
            let (gi, h) = (self.inverse_metric(k), self.second_form(k));
            let mut m = 0.0f64;
            for i in 0..2 {
                for c in 0..3 {
                    let mut rhs = 0.0;
                    for q in 0..2 {
                        for p in 0..2 {
                            rhs += h[i][q] * gi[q][p] * self.dphi[p][c][k];
                        }
                    }
                    m = m.max((dn[i][c][k] - rhs).abs());
                }
            }
            m
        });
        let second = self.max_over_nodes(|k| {
            let mut m = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    for c in 0..3 {
                        let mut rhs = -self.h[i][j][k] * self.normal[c][k];
                        for kk in 0..2 {
                            rhs += self.gamma[kk][i][j][k] * self.dphi[kk][c][k];
                        }
                        m = m.max((self.ddphi[i][j][c][k] - rhs).abs());
                    }
                }
            }
            m
        });
        (first, second)
    }

    /// Max over nodes of
    /// `|H_{,ij} − (Δh_ij + |A|² h_ij − h_is g^{sr} h_rj H)|`.
    pub fn simons_residual(&self) -> Residual {
        let gr = &self.grid;
        let t = self.covariant_dh();
        // ∂_d T_lij
        let dt: Vec<[[[Field; 2]; 2]; 2]> = (0..2)
            .map(|d| [arr2(|i, j| gr.d(&t[0][i][j], d)), arr2(|i, j| gr.d(&t[1][i][j], d))])
            .collect();
        let dhm = [gr.d(&self.mean, 0), gr.d(&self.mean, 1)];
        let ddhm = [
            [gr.d(&dhm[0], 0), gr.d(&dhm[0], 1)],
            [gr.d(&dhm[1], 0), gr.d(&dhm[1], 1)],
        ];
        self.max_over_nodes(|k| {
            let gi = self.inverse_metric(k);
            let h = self.second_form(k);
            let gm = |a: usize, i: usize, j: usize| self.gamma[a][i][j][k];
            let a2 = self.norm_a_sq(k);
            let hm = self.mean[k];
            let mut m = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    // H_{,ij}
                    let mut hess = ddhm[i][j][k];
                    for p in 0..2 {
                        hess -= gm(p, i, j) * dhm[p][k];
                    }
                    // Δh_ij = g^{kl} ∇_k ∇_l h_ij
                    let mut lap = 0.0;
                    for a in 0..2 {
                        for l in 0..2 {
                            let mut v = dt[a][l][i][j][k];
                            for p in 0..2 {
                                v -= gm(p, a, l) * t[p][i][j][k]
                                    + gm(p, a, i) * t[l][p][j][k]
                                    + gm(p, a, j) * t[l][i][p][k];
                            }
                            lap += gi[a][l] * v;
                        }
                    }
                    let mut hh = 0.0;
                    for s in 0..2 {
                        for r in 0..2 {
                            hh += h[i][s] * gi[s][r] * h[r][j];
                        }
                    }
                    let rhs = lap + a2 * h[i][j] - hh * hm;
                    m = m.max((hess - rhs).abs());
                }
            }
            m
        })
    }

    /// All identity residuals on this grid.
    pub fn residuals(&self) -> IdentityResiduals {
        let (weingarten_normal, weingarten_tangent) = self.weingarten_residuals();
        IdentityResiduals {
            gauss: self.gauss_residual(),
            codazzi: self.codazzi_residual(),
            weingarten_normal,
            weingarten_tangent,
            simons: self.simons_residual(),
        }
    }

    /// Both sides of `∫ g^{ij}⟨∂_iΦ, ∂_jX⟩ dA = ∫ H ⟨Υ, X⟩ dA` for the
    /// vector field `field` sampled at every padded node.
    pub fn divergence_identity_with(&self, field: &dyn Fn(&Self, usize) -> V3) -> Result<DivergenceReport> {
        if !self.kind.is_closed() || self.patch != Patch::Full {
            return Err(Error::InvalidParameter(
                "divergence identity needs the full patch of a closed surface".into(),
            ));
        }
        let len = self.grid.len();
        let mut x = arr3(|_| vec![f64::NAN; len]);
        for k in 0..len {
            let v = field(self, k);
            for c in 0..3 {
                x[c][k] = v[c];
            }
        }
        let dx = [arr3(|c| self.grid.d(&x[c], 0)), arr3(|c| self.grid.d(&x[c], 1))];
        let lhs = self.integrate(|k| {
            let gi = self.inverse_metric(k);
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    s += gi[i][j] * (0..3).map(|c| self.dphi[i][c][k] * dx[j][c][k]).sum::<f64>();
                }
            }
            s
        });
        let rhs = self.integrate(|k| self.mean[k] * dot(self.normal(k), arr3(|c| x[c][k])));
        Ok(DivergenceReport {
            lhs,
            rhs,
            gap: (lhs - rhs).abs(),
        })
    }

    pub fn divergence_identity(&self, field: TestField) -> Result<DivergenceReport> {
        match field {
            TestField::Normal => self.divergence_identity_with(&|s, k| s.normal(k)),
            TestField::Zero => self.divergence_identity_with(&|_, _| [0.0; 3]),
            TestField::TangentGradient { direction } => self.divergence_identity_with(&|s, k| {
                // tangential gradient of f(x) = ⟨direction, x⟩
                let gi = s.inverse_metric(k);
                let df = [dot(direction, s.tangent(0, k)), dot(direction, s.tangent(1, k))];
                let mut out = [0.0; 3];
                for i in 0..2 {
                    for j in 0..2 {
                        let t = s.tangent(j, k);
                        for c in 0..3 {
                            out[c] += gi[i][j] * df[i] * t[c];
                        }
                    }
                }
                out
            }),
        }
    }
}

/// Ambient vector fields for the divergence identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestField {
    /// The unit normal `Υ`.
    Normal,
    /// Tangential gradient of the linear function `x ↦ ⟨direction, x⟩`.
    TangentGradient {
        direction: V3,
    },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Maximum pointwise residual over physical nodes; `excluded` counts nodes
/// whose stencils were incomplete.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub max: f64,
    pub nodes: usize,
    pub excluded: usize,
}

impl Residual {
    fn union(self, other: Residual) -> Residual {
        Residual {
            max: self.max.max(other.max),
            nodes: self.nodes + other.nodes,
            excluded: self.excluded + other.excluded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub gauss: Residual,
    pub codazzi: Residual,
    pub weingarten_normal: Residual,
    pub weingarten_tangent: Residual,
    pub simons: Residual,
}

impl IdentityResiduals {
    pub const NAMES: [&'static str; 5] = ["gauss", "codazzi", "weingarten_normal", "weingarten_tangent", "simons"];

    pub fn values(&self) -> [f64; 5] {
        [
            self.gauss.max,
            self.codazzi.max,
            self.weingarten_normal.max,
            self.weingarten_tangent.max,
            self.simons.max,
        ]
    }

    fn union(self, o: IdentityResiduals) -> IdentityResiduals {
        IdentityResiduals {
            gauss: self.gauss.union(o.gauss),
            codazzi: self.codazzi.union(o.codazzi),
            weingarten_normal: self.weingarten_normal.union(o.weingarten_normal),
            weingarten_tangent: self.weingarten_tangent.union(o.weingarten_tangent),
            simons: self.simons.union(o.simons),
        }
    }
}

/// Residuals on the union of the surface's identity patches at `n × n`.
pub fn identity_residuals(kind: SurfaceKind, n: usize) -> Result<IdentityResiduals> {
    let mut acc: Option<IdentityResiduals> = None;
    for patch in kind.identity_patches() {
        let r = DiscreteSurface::new(kind, patch, n, n)?.residuals();
        acc = Some(match acc {
            None => r,
            Some(a) => a.union(r),
        });
    }
    Ok(acc.expect("every surface has a patch"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub surface: SurfaceKind,
    pub grids: Vec<usize>,
    pub levels: Vec<IdentityResiduals>,
    /// Per identity, the observed order between consecutive grids.
    pub slopes: Vec<(String, Vec<f64>)>,
}

impl ConvergenceStudy {
    /// Smallest observed order over all identities and grid pairs.
    pub fn min_slope(&self) -> f64 {
        self.slopes
            .iter()
            .flat_map(|(_, s)| s.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Residuals on a ladder of grid sizes with the observed orders
/// `log₂(r_k / r_{k+1}) / log₂(n_{k+1} / n_k)`.
pub fn convergence_study(kind: SurfaceKind, grids: &[usize]) -> Result<ConvergenceStudy> {
    let levels = grids
        .iter()
        .map(|&n| identity_residuals(kind, n))
        .collect::<Result<Vec<_>>>()?;
    let slopes = IdentityResiduals::NAMES
        .iter()
        .enumerate()
        .map(|(q, name)| {
            let s = levels
                .windows(2)
                .zip(grids.windows(2))
                .map(|(l, g)| (l[0].values()[q] / l[1].values()[q]).log2() / (g[1] as f64 / g[0] as f64).log2())
                .collect();
            (name.to_string(), s)
        })
        .collect();
    Ok(ConvergenceStudy {
        surface: kind,
        grids: grids.to_vec(),
        levels,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_normal_and_mean_curvature_on_sphere() {
        let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Band, 64, 64).unwrap();
        for k in s.nodes() {
            let n = s.normal(k);
            assert!((dot(n, n).sqrt() - 1.0).abs() < 1e-10);
            assert!((s.mean_curvature(k) - 2.0).abs() < 1e-5);
            assert!(dot(n, s.position(k)) > 0.0);
            let a2 = s.norm_a_sq(k);
            assert!(a2 >= 0.5 * s.mean_curvature(k).powi(2) - 1e-9);
        }
    }

    #[test]
    fn sphere_identities_at_64() {
        let r = identity_residuals(SurfaceKind::unit_sphere(), 64).unwrap();
        for v in r.values() {
            assert!(v <= 1e-3, "{r:?}");
        }
        assert_eq!(r.gauss.excluded, 0);
        let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Rotated, 64, 64).unwrap();
        let kg = s.gauss_curvature();
        for k in s.nodes() {
            assert!((kg[k] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn sphere_simons_at_128() {
        assert!(identity_residuals(SurfaceKind::unit_sphere(), 128).unwrap().simons.max <= 1e-2);
    }

    #[test]
    fn plane_is_exact() {
        let r = identity_residuals(SurfaceKind::Plane, 32).unwrap();
        for v in r.values() {
            assert!(v < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn torus_gauss_curvature_closed_form() {
        let (big, small) = (2.0, 1.0);
        let err = |n| {
            let s = DiscreteSurface::new(SurfaceKind::standard_torus(), Patch::Full, n, n).unwrap();
            let kg = s.gauss_curvature();
            s.nodes()
                .into_iter()
                .map(|k| {
                    let (_, v) = s.grid.coords(k);
                    (kg[k] - v.cos() / (small * (big + small * v.cos()))).abs()
                })
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(32), err(64));
        assert!(b < 1e-4 && a / b > 3.5, "{a} {b}");
    }

    #[test]
    fn ellipsoid_codazzi_converges() {
        let kind = SurfaceKind::Ellipsoid { a: 1.0, b: 1.3, c: 0.7 };
        let st = convergence_study(kind, &[32, 64]).unwrap();
        let ratio = st.levels[0].codazzi.max / st.levels[1].codazzi.max;
        assert!(ratio >= 4.0, "{ratio}");
    }

    #[test]
    fn divergence_identity_on_sphere() {
        let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Full, 64, 64).unwrap();
        let r = s.divergence_identity(TestField::Normal).unwrap();
        let want = 8.0 * PI;
        assert!(
            (r.lhs - want).abs() / want < 5e-3 && (r.rhs - want).abs() / want < 5e-3,
            "{r:?}"
        );
        let t = s
            .divergence_identity(TestField::TangentGradient {
                direction: [0.3, -0.2, 0.9],
            })
            .unwrap();
        assert!(t.rhs.abs() < 1e-9 && t.lhs.abs() < 1e-3, "{t:?}");
        let z = s.divergence_identity(TestField::Zero).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    }

    #[test]
    fn quadrature_areas() {
        let s = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Full, 64, 64).unwrap();
        // midpoint latitudes are second order against the |cos v| kink
        assert!((s.total_area() - 4.0 * PI).abs() < 2e-3);
        let t = DiscreteSurface::new(SurfaceKind::standard_torus(), Patch::Full, 64, 64).unwrap();
        assert!((t.total_area() - 8.0 * PI * PI).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DiscreteSurface::new(SurfaceKind::Sphere { radius: -1.0 }, Patch::Band, 32, 32).is_err());
        assert!(DiscreteSurface::new(SurfaceKind::Plane, Patch::Full, 32, 32).is_err());
        assert!(DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Band, 4, 32).is_err());
        let band = DiscreteSurface::new(SurfaceKind::unit_sphere(), Patch::Band, 32, 32).unwrap();
        assert!(band.divergence_identity(TestField::Normal).is_err());
    }
}
