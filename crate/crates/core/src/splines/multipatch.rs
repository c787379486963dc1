use super::geometry::{GeometryPatch, TensorBasis2D};
use crate::error::{Error, Result};

/// One of the four edges of the parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// ξ = 0
    West,
    /// ξ = 1
    East,
    /// η = 0
    South,
    /// η = 1
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    /// Parameter point on this side at edge coordinate `t`.
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Side::West => (0.0, t),
            Side::East => (1.0, t),
            Side::South => (t, 0.0),
            Side::North => (t, 1.0),
        }
    }

    /// Outward normal in the parameter domain.
    pub fn reference_normal(self) -> [f64; 2] {
        match self {
            Side::West => [-1.0, 0.0],
            Side::East => [1.0, 0.0],
            Side::South => [0.0, -1.0],
            Side::North => [0.0, 1.0],
        }
    }

    /// True when the edge coordinate is ξ (edge runs along the first direction).
    pub fn along_xi(self) -> bool {
        matches!(self, Side::South | Side::North)
    }

    /// Local dof indices on this side, ordered by increasing edge coordinate.
    pub fn dofs(self, basis: &TensorBasis2D) -> Vec<usize> {
        let (nx, ny) = (basis.nx(), basis.ny());
        match self {
            Side::West => (0..ny).map(|iy| basis.index(0, iy)).collect(),
            Side::East => (0..ny).map(|iy| basis.index(nx - 1, iy)).collect(),
            Side::South => (0..nx).map(|ix| basis.index(ix, 0)).collect(),
            Side::North => (0..nx).map(|ix| basis.index(ix, ny - 1)).collect(),
        }
    }
}

/// A glued pair of patch sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interface {
    pub patch_a: usize,
    pub side_a: Side,
    pub patch_b: usize,
    pub side_b: Side,
    pub reversed: bool,
}

/// Conforming multipatch spline space: geometry patches, the solution basis on
/// each patch and the local-to-global dof map that glues coincident interface dofs.
#[derive(Debug, Clone)]
pub struct MultiPatchDomain {
    patches: Vec<GeometryPatch>,
    bases: Vec<TensorBasis2D>,
    local_to_global: Vec<Vec<usize>>,
    global_ndof: usize,
    interfaces: Vec<Interface>,
    boundary: Vec<(usize, Side)>,
}

const EDGE_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

impl MultiPatchDomain {
    /// Same solution basis on every patch.
    pub fn new(patches: Vec<GeometryPatch>, basis: TensorBasis2D) -> Result<Self> {
        let bases = vec![basis; patches.len()];
        Self::with_bases(patches, bases)
    }

    pub fn single(patch: GeometryPatch, basis: TensorBasis2D) -> Result<Self> {
        Self::new(vec![patch], basis)
    }

    /// Detects coincident patch sides and glues their dofs; fails on non-conforming interfaces.
    pub fn with_bases(patches: Vec<GeometryPatch>, bases: Vec<TensorBasis2D>) -> Result<Self> {
        if patches.is_empty() || patches.len() != bases.len() {
            return Err(Error::Argument(
                "need one basis per patch and at least one patch".into(),
            ));
        }
        let edge_points = |p: &GeometryPatch, s: Side| -> Result<Vec<[f64; 2]>> {
            EDGE_SAMPLES
                .iter()
                .map(|&t| {
                    let (a, b) = s.point(t);
                    p.eval(a, b).map(|(x, _)| x)
                })
                .collect()
        };
        let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-10;

        let mut interfaces = Vec::new();
        for a in 0..patches.len() {
            for b in a + 1..patches.len() {
                for sa in Side::ALL {
                    let pa = edge_points(&patches[a], sa)?;
                    for sb in Side::ALL {
                        let pb = edge_points(&patches[b], sb)?;
                        let same = pa.iter().zip(&pb).all(|(x, y)| close(*x, *y));
                        let rev = pa.iter().zip(pb.iter().rev()).all(|(x, y)| close(*x, *y));
                        if same || rev {
                            interfaces.push(Interface {
                                patch_a: a,
                                side_a: sa,
                                patch_b: b,
                                side_b: sb,
                                reversed: !same,
                            });
                        }
                    }
                }
            }
        }

        let offsets: Vec<usize> = bases
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.ndof();
                Some(o)
            })
            .collect();
        let total: usize = bases.iter().map(|b| b.ndof()).sum();
        let mut parent: Vec<usize> = (0..total).collect();
        for itf in &interfaces {
            let ba = &bases[itf.patch_a];
            let bb = &bases[itf.patch_b];
            let kv_a = if itf.side_a.along_xi() { ba.basis_x() } else { ba.basis_y() };
            let kv_b = if itf.side_b.along_xi() { bb.basis_x() } else { bb.basis_y() };
            let kv_b = if itf.reversed { kv_b.reversed() } else { kv_b.clone() };
            let conforming = kv_a.degree() == kv_b.degree()
                && kv_a.knots().len() == kv_b.knots().len()
                && kv_a
                    .knots()
                    .iter()
                    .zip(kv_b.knots())
                    .all(|(x, y)| (x - y).abs() < 1e-12);
            if !conforming {
                return Err(Error::Assembly(format!(
                    "non-conforming interface between patch {} ({:?}) and patch {} ({:?})",
                    itf.patch_a, itf.side_a, itf.patch_b, itf.side_b
                )));
            }
            let da = itf.side_a.dofs(ba);
            let mut db = itf.side_b.dofs(bb);
            if itf.reversed {
                db.reverse();
            }
            for (&i, &j) in da.iter().zip(&db) {
                union(&mut parent, offsets[itf.patch_a] + i, offsets[itf.patch_b] + j);
            }
        }

        let mut global_of_root = vec![usize::MAX; total];
        let mut next = 0;
        let mut local_to_global = Vec::with_capacity(patches.len());
        for (k, b) in bases.iter().enumerate() {
            let mut map = Vec::with_capacity(b.ndof());
            for i in 0..b.ndof() {
                let r = find(&mut parent, offsets[k] + i);
                if global_of_root[r] == usize::MAX {
                    global_of_root[r] = next;
                    next += 1;
                }
                map.push(global_of_root[r]);
            }
            local_to_global.push(map);
        }

        let mut boundary = Vec::new();
        for k in 0..patches.len() {
            for s in Side::ALL {
                let glued = interfaces.iter().any(|i| {
                    (i.patch_a == k && i.side_a == s) || (i.patch_b == k && i.side_b == s)
                });
                if !glued {
                    boundary.push((k, s));
                }
            }
        }

        Ok(Self {
            patches,
            bases,
            local_to_global,
            global_ndof: next,
            interfaces,
            boundary,
        })
    }

    pub fn patches(&self) -> &[GeometryPatch] {
        &self.patches
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn basis(&self, patch: usize) -> &TensorBasis2D {
        &self.bases[patch]
    }

    pub fn degree(&self) -> usize {
        self.bases[0].degree()
    }

    pub fn local_to_global(&self, patch: usize) -> &[usize] {
        &self.local_to_global[patch]
    }

    pub fn global_ndof(&self) -> usize {
        self.global_ndof
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    /// Patch sides on the physical boundary.
    pub fn boundary_sides(&self) -> &[(usize, Side)] {
        &self.boundary
    }

    /// Same geometry with a different solution basis on every patch.
    pub fn with_basis(&self, basis: TensorBasis2D) -> Result<Self> {
        Self::new(self.patches.clone(), basis)
    }

    /// One local preimage `(patch, local)` per global dof.
    pub fn representatives(&self) -> Vec<(usize, usize)> {
        let mut rep = vec![(usize::MAX, 0); self.global_ndof];
        for (k, map) in self.local_to_global.iter().enumerate() {
            for (i, &g) in map.iter().enumerate() {
                if rep[g].0 == usize::MAX {
                    rep[g] = (k, i);
                }
            }
        }
        rep
    }
}
