use crate::error::{QdeError, Result};
use crate::scalar::{FieldTag, Scalar};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Finite quiver with labelled vertices and arrows. Labels are unique within
/// their kind; arrows are ordered as declared.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quiver {
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Arrow {
    pub label: String,
    pub source: usize,
    pub target: usize,
}

impl Quiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<Arrow>) -> Result<Quiver> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(QdeError::BadRelation(format!("duplicate vertex label {v}")));
            }
        }
        let mut aseen = BTreeSet::new();
        for a in &arrows {
            if !aseen.insert(a.label.clone()) {
                return Err(QdeError::BadRelation(format!("duplicate arrow label {}", a.label)));
            }
            if a.source >= vertices.len() || a.target >= vertices.len() {
                return Err(QdeError::BadRelation(format!("arrow {} endpoint out of range", a.label)));
            }
        }
        Ok(Quiver { vertices, arrows })
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    pub fn arrow_index(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }

    /// Arrows out of `v`, in declaration order.
    pub fn arrows_from(&self, v: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&i| self.arrows[i].source == v).collect()
    }
}

/// Composable sequence of arrows, read left to right: `arrows[0]` is applied
/// first, so consecutive entries satisfy target(a_k) = source(a_{k+1}).
/// The empty sequence is the trivial path at `source` (= `target`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Path {
    pub source: usize,
    pub target: usize,
    pub arrows: Vec<usize>,
}

impl Path {
    pub fn trivial(v: usize) -> Path {
        Path { source: v, target: v, arrows: vec![] }
    }

    pub fn from_arrows(q: &Quiver, arrows: Vec<usize>) -> Result<Path> {
        if arrows.is_empty() {
            return Err(QdeError::BadRelation("empty arrow list for path".into()));
        }
        for w in arrows.windows(2) {
            if q.arrows[w[0]].target != q.arrows[w[1]].source {
                return Err(QdeError::BadRelation(format!(
                    "arrows {} and {} do not compose",
                    q.arrows[w[0]].label, q.arrows[w[1]].label
                )));
            }
        }
        Ok(Path {
            source: q.arrows[arrows[0]].source,
            target: q.arrows[*arrows.last().unwrap()].target,
            arrows,
        })
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    /// Concatenation p then q, defined when target(p) = source(q).
    pub fn compose(&self, q: &Path) -> Option<Path> {
        if self.target != q.source {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend(&q.arrows);
        Some(Path { source: self.source, target: q.target, arrows })
    }

    pub fn display(&self, q: &Quiver) -> String {
        if self.arrows.is_empty() {
            format!("e({})", q.vertices[self.source])
        } else {
            self.arrows.iter().map(|&a| q.arrows[a].label.clone()).collect::<Vec<_>>().join("*")
        }
    }
}

/// Linear combination of parallel paths of length >= 2 with nonzero
/// coefficients, all over one field.
#[derive(Clone, PartialEq, Debug)]
pub struct RelationExpr {
    pub terms: Vec<(Scalar, Path)>,
}

impl RelationExpr {
    pub fn new(q: &Quiver, field: FieldTag, terms: Vec<(Scalar, Path)>) -> Result<RelationExpr> {
        if terms.is_empty() {
            return Err(QdeError::BadRelation("empty relation".into()));
        }
        let (src, tgt) = (terms[0].1.source, terms[0].1.target);
        for (c, p) in &terms {
            if c.field() != field {
                return Err(QdeError::MixedFields("relation coefficients".into()));
            }
            if c.is_zero() {
                return Err(QdeError::BadRelation("zero coefficient in relation".into()));
            }
            if p.len() < 2 {
                return Err(QdeError::BadRelation(format!(
                    "relation path {} has length < 2",
                    p.display(q)
                )));
            }
            if p.source != src || p.target != tgt {
                return Err(QdeError::BadRelation(format!(
                    "relation mixes non-parallel paths ({} vs {})",
                    terms[0].1.display(q),
                    p.display(q)
                )));
            }
        }
        Ok(RelationExpr { terms })
    }

    pub fn display(&self, q: &Quiver) -> String {
        let mut out = String::new();
        for (i, (c, p)) in self.terms.iter().enumerate() {
            let coeff = c.to_string();
            let lead = if i == 0 { "" } else { " + " };
            if coeff == "1" {
                let _ = write!(out, "{}{}", lead, p.display(q));
            } else if coeff == "-1" && c.field() == FieldTag::Q {
                let sep = if i == 0 { "-" } else { " - " };
                let _ = write!(out, "{}{}", sep, p.display(q));
            } else {
                let _ = write!(out, "{}{}*{}", lead, coeff, p.display(q));
            }
        }
        out
    }
}

/// Quiver with relations over a fixed field: the unit of meaning for the
/// whole library. `build` in the algebra module turns one of these into a
/// concrete finite-dimensional algebra.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebraPresentation {
    pub name: String,
    pub field: FieldTag,
    pub quiver: Quiver,
    pub relations: Vec<RelationExpr>,
}

impl AlgebraPresentation {
    /// Reverse all arrows and read every relation path backwards.
    pub fn opposite(&self) -> AlgebraPresentation {
        let quiver = Quiver {
            vertices: self.quiver.vertices.clone(),
            arrows: self
                .quiver
                .arrows
                .iter()
                .map(|a| Arrow { label: a.label.clone(), source: a.target, target: a.source })
                .collect(),
        };
        let relations = self
            .relations
            .iter()
            .map(|r| RelationExpr {
                terms: r
                    .terms
                    .iter()
                    .map(|(c, p)| {
                        let mut arrows = p.arrows.clone();
                        arrows.reverse();
                        (c.clone(), Path { source: p.target, target: p.source, arrows })
                    })
                    .collect(),
            })
            .collect();
        AlgebraPresentation {
            name: format!("{}.op", self.name),
            field: self.field,
            quiver,
            relations,
        }
    }

    /// Disjoint union presenting the direct product, with labels prefixed
    /// `left.` and `right.`.
    pub fn product(&self, other: &AlgebraPresentation) -> Result<AlgebraPresentation> {
        if self.field != other.field {
            return Err(QdeError::MixedFields(format!(
                "product of algebras over {} and {}",
                self.field, other.field
            )));
        }
        let mut vertices: Vec<String> =
            self.quiver.vertices.iter().map(|v| format!("left.{v}")).collect();
        vertices.extend(other.quiver.vertices.iter().map(|v| format!("right.{v}")));
        let off = self.quiver.vertices.len();
        let mut arrows: Vec<Arrow> = self
            .quiver
            .arrows
            .iter()
            .map(|a| Arrow {
                label: format!("left.{}", a.label),
                source: a.source,
                target: a.target,
            })
            .collect();
        arrows.extend(other.quiver.arrows.iter().map(|a| Arrow {
            label: format!("right.{}", a.label),
            source: a.source + off,
            target: a.target + off,
        }));
        let aoff = self.quiver.arrows.len();
        let mut relations = self.relations.clone();
        relations.extend(other.relations.iter().map(|r| RelationExpr {
            terms: r
                .terms
                .iter()
                .map(|(c, p)| {
                    (
                        c.clone(),
                        Path {
                            source: p.source + off,
                            target: p.target + off,
                            arrows: p.arrows.iter().map(|&a| a + aoff).collect(),
                        },
                    )
                })
                .collect(),
        }));
        Ok(AlgebraPresentation {
            name: format!("{}x{}", self.name, other.name),
            field: self.field,
            quiver: Quiver::new(vertices, arrows)?,
            relations,
        })
    }

    /// Render as `.qa` source.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "algebra {} over {} {{", self.name, self.field);
        let _ = writeln!(out, "  vertices {};", self.quiver.vertices.join(" "));
        for a in &self.quiver.arrows {
            let _ = writeln!(
                out,
                "  arrow {}: {} -> {};",
                a.label, self.quiver.vertices[a.source], self.quiver.vertices[a.target]
            );
        }
        if !self.relations.is_empty() {
            let rels: Vec<String> =
                self.relations.iter().map(|r| r.display(&self.quiver)).collect();
            let _ = writeln!(out, "  relations {};", rels.join(", "));
        }
        let _ = writeln!(out, "}}");
        out
    }
}

/// Partition of a subset of the vertices; vertices outside any part are
/// implicitly their own singleton class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexPartition {
    pub parts: Vec<Vec<usize>>,
}

impl VertexPartition {
    pub fn new(q: &Quiver, parts: Vec<Vec<usize>>) -> Result<VertexPartition> {
        let mut seen = BTreeSet::new();
        for part in &parts {
            if part.is_empty() {
                return Err(QdeError::BadRelation("empty partition part".into()));
            }
            for &v in part {
                if v >= q.vertices.len() {
                    return Err(QdeError::BadRelation("partition vertex out of range".into()));
                }
                if !seen.insert(v) {
                    return Err(QdeError::BadRelation(format!(
                        "vertex {} appears in two parts",
                        q.vertices[v]
                    )));
                }
            }
        }
        Ok(VertexPartition { parts })
    }

    /// Parse "1,2,3|4,5" against the quiver's vertex labels.
    pub fn parse(q: &Quiver, text: &str) -> Result<VertexPartition> {
        let mut parts = Vec::new();
        for chunk in text.split('|') {
            let mut part = Vec::new();
            for label in chunk.split(',') {
                let label = label.trim();
                if label.is_empty() {
                    continue;
                }
                let v = q.vertex_index(label).ok_or_else(|| {
                    QdeError::BadRelation(format!("unknown vertex {label} in partition"))
                })?;
                part.push(v);
            }
            if !part.is_empty() {
                parts.push(part);
            }
        }
        VertexPartition::new(q, parts)
    }

    /// The set of vertices covered by explicit parts.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.parts.iter().flatten().copied().collect();
        s.sort();
        s
    }

    /// Map each vertex of the quiver to its class index in the merged
    /// vertex list; returns (class labels, vertex -> class).
    pub fn classes(&self, q: &Quiver) -> (Vec<String>, Vec<usize>) {
        let mut class_of = vec![usize::MAX; q.vertices.len()];
        let mut labels = Vec::new();
        for part in &self.parts {
            let mut sorted = part.clone();
            sorted.sort();
            let label = sorted
                .iter()
                .map(|&v| q.vertices[v].clone())
                .collect::<Vec<_>>()
                .join("_");
            let idx = labels.len();
            labels.push(label);
            for &v in part {
                class_of[v] = idx;
            }
        }
        for v in 0..q.vertices.len() {
            if class_of[v] == usize::MAX {
                class_of[v] = labels.len();
                labels.push(q.vertices[v].clone());
            }
        }
        (labels, class_of)
    }
}
