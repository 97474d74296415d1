//! Hom spaces in the homotopy category. A degree-n map X -> Y is one
//! block matrix X^p -> Y^{p+n} per degree; writing it in coordinates —
//! one slot per block-basis element of each entry — the chain maps are
//! the kernel of the total differential
//!   (a^p) |-> (a^p d_Y^{n+p} - (-1)^n d_X^p a^{p+1}),
//! the null-homotopic ones its image one degree down, and the homotopy
//! Hom space their quotient. All of it is exact linear algebra.

use super::{ChainMap, ProjComplex};
use crate::algebra::{ensure_same_algebra, quotient, FDAlgebra};
use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

/// One coordinate of a degree-n map: block-basis element `k` of the
/// entry (r, c) of the matrix at source degree `p`.
struct Slot {
    p: i32,
    r: usize,
    c: usize,
    k: usize,
}

/// The coordinate space of all degree-n maps X -> Y (no chain
/// condition), with encoding and decoding.
struct MapSpace {
    x: ProjComplex,
    y: ProjComplex,
    n: i32,
    slots: Vec<Slot>,
    offsets: BTreeMap<(i32, usize, usize), usize>,
}

impl MapSpace {
    fn new(x: &ProjComplex, y: &ProjComplex, n: i32) -> Result<MapSpace> {
        ensure_same_algebra(&x.algebra, &y.algebra, "hom space")?;
        let a = &x.algebra;
        let mut slots = Vec::new();
        let mut offsets = BTreeMap::new();
        for p in x.lo..=x.hi() {
            let src = x.comps(p);
            let dst = y.comps(p + n);
            for (r, &i) in src.iter().enumerate() {
                for (c, &j) in dst.iter().enumerate() {
                    offsets.insert((p, r, c), slots.len());
                    for k in 0..a.block(i, j)?.dim() {
                        slots.push(Slot { p, r, c, k });
                    }
                }
            }
        }
        Ok(MapSpace { x: x.clone(), y: y.clone(), n, slots, offsets })
    }

    fn dim(&self) -> usize {
        self.slots.len()
    }

    fn decode(&self, coords: &[Scalar]) -> ChainMap {
        let a = &self.x.algebra;
        let mut f = ChainMap::zero(&self.x, &self.y, self.n);
        for (s, v) in self.slots.iter().zip(coords) {
            if v.is_zero() {
                continue;
            }
            let k = (s.p - self.x.lo) as usize;
            let m = &mut f.mats[k];
            let b = a
                .block(m.src[s.r], m.dst[s.c])
                .expect("slot block")
                .basis[s.k]
                .clone();
            m.entries[s.r][s.c] = a.add(&m.entries[s.r][s.c], &a.scale(v, &b));
        }
        f
    }

    fn encode(&self, f: &ChainMap) -> Result<Vec<Scalar>> {
        if f.shift_by != self.n {
            return Err(QdeError::DimMismatch("map degree disagrees with the space".into()));
        }
        for p in self.x.lo..=self.x.hi() {
            if f.source.comps(p) != self.x.comps(p) || f.target.comps(p + self.n) != self.y.comps(p + self.n) {
                return Err(QdeError::DimMismatch("map components disagree with the space".into()));
            }
        }
        let a = &self.x.algebra;
        let mut out = Vec::with_capacity(self.slots.len());
        let mut idx = 0;
        while idx < self.slots.len() {
            let s = &self.slots[idx];
            let m = f.mat_at(s.p);
            let block = a.block(m.src[s.r], m.dst[s.c])?;
            let coords = block
                .coords(&m.entries[s.r][s.c])
                .ok_or_else(|| QdeError::BlockMismatch("entry escapes its block".into()))?;
            out.extend(coords);
            idx += block.dim();
        }
        Ok(out)
    }

    /// Matrix of the Hom-complex differential out of this degree, into
    /// the degree-(n+1) space.
    fn hom_diff(&self, next: &MapSpace) -> Result<Matrix> {
        let a = &self.x.algebra;
        let field = a.field;
        let sign = field.from_i64(if self.n.rem_euclid(2) == 0 { -1 } else { 1 });
        let mut m = Matrix::zero(field, next.dim(), self.dim());
        for (j, s) in self.slots.iter().enumerate() {
            let src_i = self.x.comps(s.p)[s.r];
            let dst_j = self.y.comps(s.p + self.n)[s.c];
            let b = &a.block(src_i, dst_j)?.basis[s.k];
            // a^p then d_Y: lands in the (p, r, c') groups.
            let dy = self.y.diff(s.p + self.n);
            for (cq, &jq) in dy.dst.iter().enumerate() {
                let v = a.mul(b, &dy.entries[s.c][cq]);
                if a.is_zero_elem(&v) {
                    continue;
                }
                let off = next.offsets[&(s.p, s.r, cq)];
                let coords = a
                    .block(src_i, jq)?
                    .coords(&v)
                    .ok_or_else(|| QdeError::Internal("hom differential escapes block".into()))?;
                for (k, c) in coords.into_iter().enumerate() {
                    if !c.is_zero() {
                        m.set(off + k, j, m.at(off + k, j).add(&c));
                    }
                }
            }
            // -(-1)^n d_X then a^p: lands in the (p-1, r', c) groups.
            let dx = self.x.diff(s.p - 1);
            for (rq, &iq) in dx.src.iter().enumerate() {
                let v = a.scale(&sign, &a.mul(&dx.entries[rq][s.r], b));
                if a.is_zero_elem(&v) {
                    continue;
                }
                let off = next.offsets[&(s.p - 1, rq, s.c)];
                let coords = a
                    .block(iq, dst_j)?
                    .coords(&v)
                    .ok_or_else(|| QdeError::Internal("hom differential escapes block".into()))?;
                for (k, c) in coords.into_iter().enumerate() {
                    if !c.is_zero() {
                        m.set(off + k, j, m.at(off + k, j).add(&c));
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Hom space in the homotopy category in one degree: dimension, the
/// dimension of the null-homotopic subspace, and chain-map
/// representatives of a basis.
pub struct HomotopyHomSpace {
    pub dim: usize,
    pub cycle_dim: usize,
    pub null_dim: usize,
    pub basis: Vec<ChainMap>,
}

pub fn homotopy_hom(x: &ProjComplex, y: &ProjComplex, n: i32) -> Result<HomotopyHomSpace> {
    let sp = MapSpace::new(x, y, n)?;
    let above = MapSpace::new(x, y, n + 1)?;
    let below = MapSpace::new(x, y, n - 1)?;
    let field = x.algebra.field;
    let d_n = sp.hom_diff(&above)?;
    let d_prev = below.hom_diff(&sp)?;
    let cycles = d_n.kernel_basis();
    let image: Vec<Vec<Scalar>> = (0..d_prev.cols)
        .map(|j| (0..d_prev.rows).map(|i| d_prev.at(i, j).clone()).collect())
        .collect();
    let mut span = Subspace::span(field, sp.dim(), &image);
    let null_dim = span.dim();
    let mut reps = Vec::new();
    for v in &cycles {
        if !span.contains(v) {
            reps.push(sp.decode(v));
            span = span.sum(&Subspace::span(field, sp.dim(), std::slice::from_ref(v)));
        }
    }
    Ok(HomotopyHomSpace {
        dim: reps.len(),
        cycle_dim: cycles.len(),
        null_dim,
        basis: reps,
    })
}

/// The algebra of strict chain endomorphisms (cycles in degree zero of
/// the endomorphism Hom-complex), before passing to homotopy classes.
pub struct StrictEnd {
    pub algebra: Arc<FDAlgebra>,
    /// reps[i] is the chain endomorphism realizing basis element i.
    pub reps: Vec<ChainMap>,
    /// Null-homotopic endomorphisms, in strict-basis coordinates.
    pub null_in_end: Subspace,
    space: MapSpace,
    zmat: Matrix,
}

impl StrictEnd {
    /// Strict-basis coordinates of a chain endomorphism.
    pub fn coords_of(&self, f: &ChainMap) -> Result<Vec<Scalar>> {
        let slots = self.space.encode(f)?;
        self.zmat
            .solve(&slots)
            .ok_or_else(|| QdeError::VerificationFailed("not a chain endomorphism".into()))
    }

    /// The chain endomorphism with the given strict-basis coordinates.
    pub fn realize(&self, coords: &[Scalar]) -> ChainMap {
        self.space.decode(&self.zmat.apply(coords))
    }
}

pub fn strict_end(x: &ProjComplex) -> Result<StrictEnd> {
    let space = MapSpace::new(x, x, 0)?;
    let above = MapSpace::new(x, x, 1)?;
    let below = MapSpace::new(x, x, -1)?;
    let field = x.algebra.field;
    let d0 = space.hom_diff(&above)?;
    let dm1 = below.hom_diff(&space)?;
    let z = d0.kernel_basis();
    let d = z.len();
    let mut zmat = Matrix::zero(field, space.dim(), d);
    for (j, v) in z.iter().enumerate() {
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                zmat.set(i, j, c.clone());
            }
        }
    }
    if d == 0 {
        return Ok(StrictEnd {
            algebra: FDAlgebra::zero_algebra(field),
            reps: vec![],
            null_in_end: Subspace::zero(field, 0),
            space,
            zmat,
        });
    }
    let in_z = |slots: &[Scalar]| -> Result<Vec<Scalar>> {
        zmat.solve(slots)
            .ok_or_else(|| QdeError::Internal("cycle space not closed".into()))
    };
    let reps: Vec<ChainMap> = z.iter().map(|v| space.decode(v)).collect();
    let mut left_mult = Vec::with_capacity(d);
    for i in 0..d {
        let mut lm = Matrix::zero(field, d, d);
        for j in 0..d {
            // product z_i z_j = first z_i then z_j
            let prod = reps[i].then(&reps[j])?;
            for (r, v) in in_z(&space.encode(&prod)?)?.into_iter().enumerate() {
                if !v.is_zero() {
                    lm.set(r, j, v);
                }
            }
        }
        left_mult.push(lm);
    }
    let one = in_z(&space.encode(&ChainMap::identity(x)?)?)?;
    let labels = (0..d).map(|i| format!("z{i}")).collect();
    let algebra = FDAlgebra::from_parts(field, labels, left_mult, one)?;
    let mut null_vecs = Vec::new();
    for j in 0..dm1.cols {
        let col: Vec<Scalar> = (0..dm1.rows).map(|i| dm1.at(i, j).clone()).collect();
        null_vecs.push(in_z(&col)?);
    }
    let null_in_end = Subspace::span(field, d, &null_vecs);
    Ok(StrictEnd { algebra, reps, null_in_end, space, zmat })
}

/// The endomorphism algebra in the homotopy category: the strict
/// algebra modulo its null-homotopic ideal, with maps back and forth.
pub struct EndK {
    pub algebra: Arc<FDAlgebra>,
    pub strict: StrictEnd,
    /// Strict-basis coordinates to quotient coordinates.
    pub proj: Matrix,
    /// Linear section: quotient coordinates to strict-basis coordinates.
    pub section: Matrix,
}

impl EndK {
    /// Homotopy class of a chain endomorphism, in quotient coordinates.
    pub fn class_of(&self, f: &ChainMap) -> Result<Vec<Scalar>> {
        Ok(self.proj.apply(&self.strict.coords_of(f)?))
    }

    /// A strict representative of a quotient class.
    pub fn representative(&self, class: &[Scalar]) -> ChainMap {
        self.strict.realize(&self.section.apply(class))
    }
}

pub fn end_algebra_k(x: &ProjComplex) -> Result<EndK> {
    let strict = strict_end(x)?;
    let sdim = strict.algebra.dim;
    if sdim == 0 {
        let field = x.algebra.field;
        return Ok(EndK {
            algebra: FDAlgebra::zero_algebra(field),
            proj: Matrix::zero(field, 0, 0),
            section: Matrix::zero(field, 0, 0),
            strict,
        });
    }
    let gens = strict.null_in_end.basis_rows();
    let q = quotient(&strict.algebra, &gens)?;
    let field = strict.algebra.field;
    let positions = q.ideal.complement_coords();
    let mut section = Matrix::zero(field, sdim, q.alg.dim);
    for (t, &p) in positions.iter().enumerate() {
        section.set(p, t, field.one());
    }
    Ok(EndK { algebra: q.alg, proj: q.projection, section, strict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{make_complex, projective_stalk, shift};
    use crate::fixtures::{algebra_from, EX56_A, EX56_T};
    use crate::parse::parse_source;

    #[test]
    fn stalk_hom_spaces_match_blocks() {
        let a = algebra_from(EX56_A).unwrap();
        // Hom(Ae_1[0], Ae_2[0]) in degree 0 is the block e_1 A e_2.
        let p1 = projective_stalk(&a, 0, 0).unwrap();
        let p2 = projective_stalk(&a, 1, 0).unwrap();
        let h = homotopy_hom(&p1, &p2, 0).unwrap();
        assert_eq!(h.dim, a.block(0, 1).unwrap().dim());
        assert_eq!(h.null_dim, 0);
        for f in &h.basis {
            f.verify().unwrap();
        }
        // Nothing in nonzero degrees between stalks in the same degree.
        assert_eq!(homotopy_hom(&p1, &p2, 1).unwrap().dim, 0);
        assert_eq!(homotopy_hom(&p1, &p2, -1).unwrap().dim, 0);
        // Against a shifted stalk the degree shifts along.
        let p2s = shift(&p2, -1);
        assert_eq!(homotopy_hom(&p1, &p2s, 1).unwrap().dim, a.block(0, 1).unwrap().dim());
    }

    #[test]
    fn two_term_complex_hom_dimensions() {
        let items = parse_source(EX56_T).unwrap();
        let a = crate::algebra::build(items[0].as_algebra().unwrap()).unwrap();
        let t = make_complex(&a, items[1].as_complex().unwrap()).unwrap();
        let h0 = homotopy_hom(&t, &t, 0).unwrap();
        assert_eq!(h0.dim, 13);
        for n in [-2, -1, 1, 2] {
            assert_eq!(homotopy_hom(&t, &t, n).unwrap().dim, 0, "degree {n}");
        }
        for f in &h0.basis {
            f.verify().unwrap();
        }
    }

    #[test]
    fn strict_end_of_a_stalk_is_the_corner() {
        let a = algebra_from(EX56_A).unwrap();
        let p = projective_stalk(&a, 2, 0).unwrap();
        let e = strict_end(&p).unwrap();
        assert_eq!(e.algebra.dim, a.block(2, 2).unwrap().dim());
        assert!(e.null_in_end.dim() == 0);
        let k = end_algebra_k(&p).unwrap();
        assert_eq!(k.algebra.dim, e.algebra.dim);
    }
}
