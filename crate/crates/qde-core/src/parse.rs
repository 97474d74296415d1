use crate::error::{QdeError, Result};
use crate::quiver::{AlgebraPresentation, Arrow, Path, Quiver, RelationExpr};
use crate::scalar::FieldTag;
use std::collections::BTreeMap;

/// One syntactic term of a differential entry: `num/den * word`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ElemTerm {
    pub num: i64,
    pub den: i64,
    pub word: PathWord,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PathWord {
    /// `e(v)`: the trivial path at vertex v.
    Trivial(String),
    /// `a*b*c`: arrow labels composed left to right.
    Arrows(Vec<String>),
}

pub type ElemExpr = Vec<ElemTerm>;

/// Complex block as written, before resolution against a built algebra:
/// per-degree projective lists (vertex labels) and row-major entry
/// expressions for each differential.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ComplexSpec {
    pub name: String,
    pub algebra: String,
    pub terms: BTreeMap<i32, Vec<String>>,
    pub diffs: BTreeMap<i32, Vec<Vec<ElemExpr>>>,
}

#[derive(Clone, PartialEq, Debug)]
pub enum SourceItem {
    Algebra(AlgebraPresentation),
    Complex(ComplexSpec),
}

impl SourceItem {
    pub fn as_algebra(&self) -> Option<&AlgebraPresentation> {
        match self {
            SourceItem::Algebra(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<&ComplexSpec> {
        match self {
            SourceItem::Complex(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(char),
    ArrowSym,
}

#[derive(Clone, Debug)]
struct Sp {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Sp>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            // A digit run followed by identifier characters is a label like
            // "1a"; plain digit runs are integers usable as labels too.
            if j < bytes.len() && (bytes[j].is_alphanumeric() || bytes[j] == '_' || bytes[j] == '\'') {
                while j < bytes.len()
                    && (bytes[j].is_alphanumeric() || bytes[j] == '_' || bytes[j] == '\'' || bytes[j] == '.')
                {
                    j += 1;
                }
                let s: String = bytes[i..j].iter().collect();
                col += j - i;
                i = j;
                out.push(Sp { tok: Tok::Ident(s), line, col: start_col });
            } else {
                let s: String = bytes[i..j].iter().collect();
                let v: i64 = s.parse().map_err(|_| QdeError::Parse {
                    line,
                    col: start_col,
                    msg: format!("integer {s} out of range"),
                })?;
                col += j - i;
                i = j;
                out.push(Sp { tok: Tok::Int(v), line, col: start_col });
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < bytes.len()
                && (bytes[j].is_alphanumeric() || bytes[j] == '_' || bytes[j] == '\'' || bytes[j] == '.')
            {
                j += 1;
            }
            let s: String = bytes[i..j].iter().collect();
            col += j - i;
            i = j;
            out.push(Sp { tok: Tok::Ident(s), line, col: start_col });
            continue;
        }
        if c == '-' && i + 1 < bytes.len() && bytes[i + 1] == '>' {
            out.push(Sp { tok: Tok::ArrowSym, line, col: start_col });
            i += 2;
            col += 2;
            continue;
        }
        if "{}():;,*+-/=[]".contains(c) {
            out.push(Sp { tok: Tok::Punct(c), line, col: start_col });
            i += 1;
            col += 1;
            continue;
        }
        return Err(QdeError::Parse { line, col: start_col, msg: format!("unexpected character {c:?}") });
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Sp>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn err(&self, msg: impl Into<String>) -> QdeError {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((0, 0));
        QdeError::Parse { line, col, msg: msg.into() }
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t.tok)
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.next()? {
            Tok::Punct(p) if p == c => Ok(()),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected {c:?}, found {other:?}")))
            }
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            Tok::Int(v) => Ok(v.to_string()),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected name, found {other:?}")))
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.next()? {
            Tok::Ident(s) if s == kw => Ok(()),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected {kw:?}, found {other:?}")))
            }
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat_punct('-');
        match self.next()? {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected integer, found {other:?}")))
            }
        }
    }
}

/// Parse a `.qa` source file into its algebra and complex blocks.
pub fn parse_source(src: &str) -> Result<Vec<SourceItem>> {
    let toks = lex(src)?;
    let mut cur = Cursor { toks, pos: 0 };
    let mut items = Vec::new();
    while cur.peek().is_some() {
        match cur.peek() {
            Some(Tok::Ident(s)) if s == "algebra" => {
                cur.next()?;
                items.push(SourceItem::Algebra(parse_algebra(&mut cur)?));
            }
            Some(Tok::Ident(s)) if s == "complex" => {
                cur.next()?;
                items.push(SourceItem::Complex(parse_complex(&mut cur)?));
            }
            _ => return Err(cur.err("expected 'algebra' or 'complex' block")),
        }
    }
    Ok(items)
}

fn parse_field(cur: &mut Cursor) -> Result<FieldTag> {
    let name = cur.ident()?;
    match name.as_str() {
        "Q" => Ok(FieldTag::Q),
        "GF" => {
            cur.expect_punct('(')?;
            let p = cur.int()?;
            cur.expect_punct(')')?;
            if p <= 0 || p >= (1 << 31) {
                return Err(cur.err(format!("invalid prime {p}")));
            }
            FieldTag::fp(p as u32)
        }
        other => Err(cur.err(format!("unknown field {other:?}"))),
    }
}

fn parse_algebra(cur: &mut Cursor) -> Result<AlgebraPresentation> {
    let name = cur.ident()?;
    cur.keyword("over")?;
    let field = parse_field(cur)?;
    cur.expect_punct('{')?;
    let mut vertices: Vec<String> = Vec::new();
    let mut arrows: Vec<Arrow> = Vec::new();
    let mut raw_relations: Vec<ElemExpr> = Vec::new();
    loop {
        match cur.peek() {
            Some(Tok::Punct('}')) => {
                cur.next()?;
                break;
            }
            Some(Tok::Ident(s)) if s == "vertices" => {
                cur.next()?;
                loop {
                    if cur.eat_punct(';') {
                        break;
                    }
                    vertices.push(cur.ident()?);
                }
            }
            Some(Tok::Ident(s)) if s == "arrow" => {
                cur.next()?;
                let label = cur.ident()?;
                cur.expect_punct(':')?;
                let src = cur.ident()?;
                match cur.next()? {
                    Tok::ArrowSym => {}
                    _ => return Err(cur.err("expected '->'")),
                }
                let tgt = cur.ident()?;
                cur.expect_punct(';')?;
                let source = vertices
                    .iter()
                    .position(|v| *v == src)
                    .ok_or_else(|| cur.err(format!("unknown vertex {src:?}")))?;
                let target = vertices
                    .iter()
                    .position(|v| *v == tgt)
                    .ok_or_else(|| cur.err(format!("unknown vertex {tgt:?}")))?;
                arrows.push(Arrow { label, source, target });
            }
            Some(Tok::Ident(s)) if s == "relations" => {
                cur.next()?;
                loop {
                    raw_relations.push(parse_elem_expr(cur)?);
                    if cur.eat_punct(',') {
                        continue;
                    }
                    cur.expect_punct(';')?;
                    break;
                }
            }
            _ => return Err(cur.err("expected 'vertices', 'arrow', 'relations', or '}'")),
        }
    }
    let quiver = Quiver::new(vertices, arrows)?;
    let mut relations = Vec::new();
    for raw in raw_relations {
        relations.push(resolve_relation(&quiver, field, &raw)?);
    }
    Ok(AlgebraPresentation { name, field, quiver, relations })
}

fn resolve_relation(q: &Quiver, field: FieldTag, raw: &ElemExpr) -> Result<RelationExpr> {
    let mut terms = Vec::new();
    for t in raw {
        let coeff = field.from_ratio(t.num, t.den)?;
        let path = match &t.word {
            PathWord::Trivial(v) => {
                return Err(QdeError::BadRelation(format!("trivial path e({v}) in relation")))
            }
            PathWord::Arrows(labels) => {
                let mut idx = Vec::new();
                for l in labels {
                    idx.push(q.arrow_index(l).ok_or_else(|| {
                        QdeError::BadRelation(format!("unknown arrow {l:?} in relation"))
                    })?);
                }
                Path::from_arrows(q, idx)?
            }
        };
        if coeff.is_zero() {
            continue;
        }
        terms.push((coeff, path));
    }
    RelationExpr::new(q, field, terms)
}

fn parse_complex(cur: &mut Cursor) -> Result<ComplexSpec> {
    let name = cur.ident()?;
    cur.keyword("over")?;
    let algebra = cur.ident()?;
    cur.expect_punct('{')?;
    let mut terms = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    loop {
        match cur.peek() {
            Some(Tok::Punct('}')) => {
                cur.next()?;
                break;
            }
            Some(Tok::Ident(s)) if s == "term" => {
                cur.next()?;
                let deg = cur.int()? as i32;
                cur.expect_punct(':')?;
                let mut list = Vec::new();
                if !cur.eat_punct(';') {
                    loop {
                        cur.keyword("P")?;
                        cur.expect_punct('(')?;
                        list.push(cur.ident()?);
                        cur.expect_punct(')')?;
                        if cur.eat_punct(',') {
                            continue;
                        }
                        cur.expect_punct(';')?;
                        break;
                    }
                }
                if terms.insert(deg, list).is_some() {
                    return Err(cur.err(format!("duplicate term {deg}")));
                }
            }
            Some(Tok::Ident(s)) if s == "d" => {
                cur.next()?;
                cur.expect_punct('(')?;
                let deg = cur.int()? as i32;
                cur.expect_punct(')')?;
                cur.expect_punct('=')?;
                cur.expect_punct('[')?;
                let mut rows = Vec::new();
                loop {
                    let mut row = Vec::new();
                    loop {
                        row.push(parse_entry(cur)?);
                        if cur.eat_punct(',') {
                            continue;
                        }
                        break;
                    }
                    rows.push(row);
                    if cur.eat_punct(';') {
                        continue;
                    }
                    cur.expect_punct(']')?;
                    break;
                }
                cur.expect_punct(';')?;
                if diffs.insert(deg, rows).is_some() {
                    return Err(cur.err(format!("duplicate differential d({deg})")));
                }
            }
            _ => return Err(cur.err("expected 'term', 'd', or '}'")),
        }
    }
    Ok(ComplexSpec { name, algebra, terms, diffs })
}

/// Entry of a differential matrix: `0` or a path expression.
fn parse_entry(cur: &mut Cursor) -> Result<ElemExpr> {
    if cur.peek() == Some(&Tok::Int(0)) {
        // Lone zero, not followed by * or /.
        let save = cur.pos;
        cur.next()?;
        match cur.peek() {
            Some(Tok::Punct('*')) | Some(Tok::Punct('/')) => cur.pos = save,
            _ => return Ok(vec![]),
        }
    }
    parse_elem_expr(cur)
}

fn parse_elem_expr(cur: &mut Cursor) -> Result<ElemExpr> {
    let mut out = Vec::new();
    let mut sign = if cur.eat_punct('-') { -1i64 } else { 1 };
    loop {
        let mut term = parse_elem_term(cur)?;
        term.num *= sign;
        out.push(term);
        match cur.peek() {
            Some(Tok::Punct('+')) => {
                cur.next()?;
                sign = 1;
            }
            Some(Tok::Punct('-')) => {
                cur.next()?;
                sign = -1;
            }
            _ => break,
        }
    }
    Ok(out)
}

fn parse_elem_term(cur: &mut Cursor) -> Result<ElemTerm> {
    let mut num = 1i64;
    let mut den = 1i64;
    if let Some(Tok::Int(_)) = cur.peek() {
        num = cur.int()?;
        if cur.eat_punct('/') {
            den = cur.int()?;
            if den == 0 {
                return Err(cur.err("zero denominator"));
            }
        }
        cur.expect_punct('*')?;
    }
    let word = parse_word(cur)?;
    Ok(ElemTerm { num, den, word })
}

fn parse_word(cur: &mut Cursor) -> Result<PathWord> {
    let first = cur.ident()?;
    if first == "e" && cur.peek() == Some(&Tok::Punct('(')) {
        cur.next()?;
        let v = cur.ident()?;
        cur.expect_punct(')')?;
        return Ok(PathWord::Trivial(v));
    }
    let mut labels = vec![first];
    while cur.eat_punct('*') {
        labels.push(cur.ident()?);
    }
    Ok(PathWord::Arrows(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = r#"
# three-vertex algebra with a commutativity relation
algebra A over Q {
  vertices 1 2 3;
  arrow alpha: 1 -> 2;
  arrow delta: 2 -> 1;
  arrow beta:  2 -> 3;
  arrow gamma: 3 -> 2;
  relations alpha*delta*alpha, gamma*delta, delta*alpha - beta*gamma;
}

complex T over A {
  term 0: P(1);
  term -1: P(2), P(2), P(3);
  d(-1) = [ delta, 0, 0 ];
}
"#;

    #[test]
    fn parses_algebra_and_complex() {
        let items = parse_source(EX).unwrap();
        assert_eq!(items.len(), 2);
        let a = items[0].as_algebra().unwrap();
        assert_eq!(a.quiver.vertices, vec!["1", "2", "3"]);
        assert_eq!(a.quiver.arrows.len(), 4);
        assert_eq!(a.relations.len(), 3);
        assert_eq!(a.relations[2].terms.len(), 2);
        let t = items[1].as_complex().unwrap();
        assert_eq!(t.algebra, "A");
        assert_eq!(t.terms[&0], vec!["1"]);
        assert_eq!(t.terms[&-1], vec!["2", "2", "3"]);
        let d = &t.diffs[&-1];
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].len(), 3);
        assert!(d[0][1].is_empty());
        assert_eq!(d[0][0][0].word, PathWord::Arrows(vec!["delta".into()]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_source("algebra A over R { }").is_err());
        assert!(parse_source("algebra A over Q { vertices 1 1; }").is_err());
        assert!(parse_source(
            "algebra A over Q { vertices 1 2; arrow a: 1 -> 2; relations a; }"
        )
        .is_err());
        // non-composable relation path
        assert!(parse_source(
            "algebra A over Q { vertices 1 2; arrow a: 1 -> 2; relations a*a; }"
        )
        .is_err());
        // non-parallel sum
        assert!(parse_source(
            "algebra A over Q { vertices 1 2 3; arrow a: 1 -> 2; arrow b: 2 -> 3; arrow c: 2 -> 1; relations a*b - a*c; }"
        )
        .is_err());
        assert!(parse_source("algebra A over GF(4) { vertices 1; }").is_err());
    }

    #[test]
    fn coefficients_and_signs() {
        let items = parse_source(
            "algebra A over Q { vertices 1 2; arrow a: 1 -> 2; arrow b: 1 -> 2; arrow c: 2 -> 1; relations 2*a*c - 1/3*b*c, -a*c*a*c; }",
        )
        .unwrap();
        let a = items[0].as_algebra().unwrap();
        assert_eq!(a.relations.len(), 2);
        let r = &a.relations[0];
        assert_eq!(r.terms[0].0, FieldTag::Q.from_i64(2));
        assert_eq!(r.terms[1].0, FieldTag::Q.from_ratio(-1, 3).unwrap());
    }

    #[test]
    fn gf_coefficients_reduce() {
        let items = parse_source(
            "algebra A over GF(5) { vertices 1; arrow x: 1 -> 1; relations 7*x*x; }",
        )
        .unwrap();
        let a = items[0].as_algebra().unwrap();
        let f = FieldTag::fp(5).unwrap();
        assert_eq!(a.relations[0].terms[0].0, f.from_i64(2));
    }
}
