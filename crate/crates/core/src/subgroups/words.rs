//! Reduced words in generators and their inverses.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    /// Position in the alphabet `g1..gk, g1^-1..gk^-1`.
    pub fn index(&self, k: usize) -> usize {
        self.generator + if self.inverse { k } else { 0 }
    }

    pub fn all(k: usize) -> impl Iterator<Item = Letter> {
        (0..k)
            .map(|g| Letter { generator: g, inverse: false })
            .chain((0..k).map(|g| Letter { generator: g, inverse: true }))
    }

    pub fn inverted(&self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn is_inverse_of(&self, other: &Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn extended(&self, l: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    /// Concatenation with free reduction at the seam.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        for l in &other.0 {
            match v.last() {
                Some(last) if last.is_inverse_of(l) => {
                    v.pop();
                }
                _ => v.push(*l),
            }
        }
        Word(v)
    }

    /// `a*b^-1*a`, or `e` for the empty word.
    pub fn label(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|l| {
                let n = &names[l.generator];
                if l.inverse {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..=self.0.iter().map(|l| l.generator).max().unwrap_or(0))
            .map(|i| format!("g{}", i + 1))
            .collect();
        f.write_str(&self.label(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_reduces() {
        let a = Letter { generator: 0, inverse: false };
        let b = Letter { generator: 1, inverse: false };
        let w = Word::empty().extended(a).extended(b);
        assert!(w.concat(&w.inverse()).is_empty());
        assert_eq!(w.label(&["a".into(), "b".into()]), "a*b");
        assert_eq!(w.inverse().label(&["a".into(), "b".into()]), "b^-1*a^-1");
    }
}
