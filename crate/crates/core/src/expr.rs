//! Tensor shorthand for sums of basis elements, e.g. `I_2A_2+XA_1`.
//!
//! A term is a juxtaposition of factors, one per cyclic factor of a product
//! scheme, read as their Kronecker product. Factors:
//!
//! | token       | meaning on a ν-cycle factor          |
//! |-------------|--------------------------------------|
//! | `A_j`       | basis matrix j of the cyclic scheme  |
//! | `I_k`       | identity, k must equal ν             |
//! | `X`         | the 2×2 swap, ν must be 2            |
//! | `S`, `S^p`  | cyclic shift and its powers          |
//!
//! A lone `I_N` with N the full vertex count is the identity. For schemes
//! that are not products, a term is a single `A_j` or `I_N`. Subscripts may
//! be written `A_3`, `A_{10}` or `A3`.

use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::schemes::{
    cyclic_scheme, shift_power, sigma_x, AssociationScheme, SchemeError, SchemeSpec,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected {found:?} at byte {at} in {expr:?}")]
    Syntax { expr: String, at: usize, found: char },
    #[error("term {term:?} has {found} factors, scheme has {expected}")]
    Arity {
        term: String,
        expected: usize,
        found: usize,
    },
    #[error("{token} does not fit a factor of order {order}")]
    Factor { token: String, order: usize },
    #[error("{0} is out of range for this scheme")]
    Index(String),
    #[error("terms overlap; the sum would not be a 0/1 selection")]
    Overlap,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    A(usize),
    I(usize),
    X,
    S(usize),
}

impl Token {
    fn text(&self) -> String {
        match self {
            Token::A(j) => format!("A_{j}"),
            Token::I(k) => format!("I_{k}"),
            Token::X => "X".into(),
            Token::S(1) => "S".into(),
            Token::S(p) => format!("S^{p}"),
        }
    }
}

fn parse_term(expr: &str, offset: usize, term: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = term.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let syntax = |at: usize| ExprError::Syntax {
        expr: expr.to_string(),
        at: offset + at,
        found: term[at..].chars().next().unwrap_or(' '),
    };
    let number = |i: &mut usize| -> Option<usize> {
        let braced = bytes.get(*i) == Some(&b'{');
        if braced {
            *i += 1;
        }
        let start = *i;
        while bytes.get(*i).is_some_and(u8::is_ascii_digit) {
            *i += 1;
        }
        let value = term[start..*i].parse().ok();
        if braced {
            if bytes.get(*i) != Some(&b'}') {
                return None;
            }
            *i += 1;
        }
        value
    };
    while i < bytes.len() {
        let c = bytes[i];
        i += 1;
        match c {
            b'A' | b'I' => {
                if bytes.get(i) == Some(&b'_') {
                    i += 1;
                }
                let v = number(&mut i).ok_or_else(|| syntax(i.min(term.len() - 1)))?;
                out.push(if c == b'A' { Token::A(v) } else { Token::I(v) });
            }
            b'X' => out.push(Token::X),
            b'S' => {
                let p = if bytes.get(i) == Some(&b'^') {
                    i += 1;
                    number(&mut i).ok_or_else(|| syntax(i.min(term.len() - 1)))?
                } else {
                    1
                };
                out.push(Token::S(p));
            }
            _ => return Err(syntax(i - 1)),
        }
    }
    Ok(out)
}

fn factor_matrix(token: &Token, order: usize, factor: &AssociationScheme) -> Result<BitMatrix, ExprError> {
    let mismatch = || ExprError::Factor {
        token: token.text(),
        order,
    };
    match *token {
        Token::A(j) => factor.matrix(j).cloned().ok_or_else(|| ExprError::Index(token.text())),
        Token::I(k) if k == order => Ok(BitMatrix::identity(order)),
        Token::X if order == 2 => Ok(sigma_x()),
        Token::S(p) => Ok(shift_power(order, p as i64)),
        _ => Err(mismatch()),
    }
}

/// Evaluate `expr` over `scheme`, which must have been built from `spec`.
///
/// Terms must have disjoint supports, so the result is also their integer sum.
pub fn evaluate(spec: &SchemeSpec, scheme: &AssociationScheme, expr: &str) -> Result<BitMatrix, ExprError> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(ExprError::Empty);
    }
    let nu = scheme.order();
    let orders = spec.cyclic_factors();
    let factors: Vec<AssociationScheme> = match &orders {
        Some(o) => o.iter().map(|&k| cyclic_scheme(k)).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let mut acc = BitMatrix::zeros(nu, nu);
    let mut offset = 0;
    for term in compact.split('+') {
        if term.is_empty() {
            return Err(ExprError::Syntax {
                expr: compact.clone(),
                at: offset,
                found: '+',
            });
        }
        let tokens = parse_term(&compact, offset, term)?;
        let m = match (tokens.as_slice(), &orders) {
            ([Token::I(k)], _) if *k == nu => BitMatrix::identity(nu),
            ([Token::A(j)], None) => scheme
                .matrix(*j)
                .cloned()
                .ok_or_else(|| ExprError::Index(tokens[0].text()))?,
            (_, None) => {
                return Err(ExprError::Arity {
                    term: term.to_string(),
                    expected: 1,
                    found: tokens.len(),
                })
            }
            (_, Some(o)) => {
                if tokens.len() != o.len() {
                    return Err(ExprError::Arity {
                        term: term.to_string(),
                        expected: o.len(),
                        found: tokens.len(),
                    });
                }
                let mut m = factor_matrix(&tokens[0], o[0], &factors[0])?;
                for (t, (k, f)) in tokens.iter().zip(o.iter().zip(&factors)).skip(1) {
                    m = m.kron(&factor_matrix(t, *k, f)?);
                }
                m
            }
        };
        let before = acc.count_ones() + m.count_ones();
        acc = acc.add(&m).expect("terms are ν×ν");
        if acc.count_ones() != before {
            return Err(ExprError::Overlap);
        }
        offset += term.len() + 1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(spec: &str) -> (SchemeSpec, AssociationScheme) {
        let spec: SchemeSpec = spec.parse().unwrap();
        let s = spec.build().unwrap();
        (spec, s)
    }

    #[test]
    fn cyclic_sums() {
        let (spec, s) = build("cyclic:21");
        let m = evaluate(&spec, &s, "A_3+A_4+A_{10}").unwrap();
        let direct = s.adjacency()[3].add(&s.adjacency()[4]).unwrap().add(&s.adjacency()[10]).unwrap();
        assert_eq!(m, direct);
        assert_eq!(evaluate(&spec, &s, "A3 + A4 + A10").unwrap(), direct);
        assert_eq!(evaluate(&spec, &s, "I_21").unwrap(), BitMatrix::identity(21));
        assert!(matches!(evaluate(&spec, &s, "A_11"), Err(ExprError::Index(_))));
        assert!(matches!(evaluate(&spec, &s, "A_1A_2"), Err(ExprError::Arity { .. })));
        assert_eq!(evaluate(&spec, &s, "A_1+A_1"), Err(ExprError::Overlap));
        assert_eq!(evaluate(&spec, &s, ""), Err(ExprError::Empty));
        assert!(matches!(evaluate(&spec, &s, "A_1+"), Err(ExprError::Syntax { .. })));
        assert!(matches!(evaluate(&spec, &s, "B_1"), Err(ExprError::Syntax { .. })));
        assert_eq!(evaluate(&spec, &s, "S+S^20").unwrap(), s.adjacency()[1]);
    }

    #[test]
    fn product_terms_are_kronecker_products() {
        let (spec, s) = build("product:cyclic:2,cyclic:4");
        let c4 = cyclic_scheme(4).unwrap();
        let m = evaluate(&spec, &s, "I_2A_2+XA_1").unwrap();
        let expect = BitMatrix::identity(2)
            .kron(&c4.adjacency()[2])
            .add(&sigma_x().kron(&c4.adjacency()[1]))
            .unwrap();
        assert_eq!(m, expect);
        // Matches the product basis: index (i, j) sits at 3i + j.
        assert_eq!(evaluate(&spec, &s, "XA_1").unwrap(), s.adjacency()[4]);
        assert!(matches!(evaluate(&spec, &s, "I_3A_1"), Err(ExprError::Factor { .. })));
        assert!(matches!(evaluate(&spec, &s, "A_2"), Err(ExprError::Arity { .. })));
    }

    #[test]
    fn shifts_and_full_identity() {
        let (spec, s) = build("product:cyclic:3,cyclic:3");
        let sh = shift_power(3, 1);
        let sh2 = shift_power(3, 2);
        let m = evaluate(&spec, &s, "SS^2+S^2S").unwrap();
        assert_eq!(m, sh.kron(&sh2).add(&sh2.kron(&sh)).unwrap());
        let (spec, s) = build("product:cyclic:3,cyclic:4");
        assert_eq!(evaluate(&spec, &s, "I_12").unwrap(), BitMatrix::identity(12));
        assert_eq!(
            evaluate(&spec, &s, "I_3I_4").unwrap(),
            BitMatrix::identity(12)
        );
    }
}
