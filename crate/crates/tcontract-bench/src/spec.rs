//! Index-string parsing: `"abc-adec-ebd"` names the contraction
//! `C_abc := A_adec * B_ebd` (groups ordered C-A-B).

use std::collections::BTreeSet;
use std::fmt;

use tcontract::{LabelSet, Result as TcResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte position in the input string.
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// A contraction named by its index string, groups in C-A-B order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionSpec {
    pub labels_c: String,
    pub labels_a: String,
    pub labels_b: String,
}

impl fmt::Display for ContractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.labels_c, self.labels_a, self.labels_b)
    }
}

impl ContractionSpec {
    pub fn label_set_c(&self) -> TcResult<LabelSet> {
        LabelSet::parse(&self.labels_c)
    }

    pub fn label_set_a(&self) -> TcResult<LabelSet> {
        LabelSet::parse(&self.labels_a)
    }

    pub fn label_set_b(&self) -> TcResult<LabelSet> {
        LabelSet::parse(&self.labels_b)
    }

    /// All distinct labels, sorted.
    pub fn labels(&self) -> Vec<char> {
        let set: BTreeSet<char> = self
            .labels_c
            .chars()
            .chain(self.labels_a.chars())
            .chain(self.labels_b.chars())
            .collect();
        set.into_iter().collect()
    }
}

/// Parses an index string of exactly three '-'-separated ASCII letter
/// groups and validates that every label classifies into a valid bundle
/// (appears in exactly two of the three groups, never twice in one).
pub fn parse_spec(s: &str) -> Result<ContractionSpec, ParseError> {
    for (pos, ch) in s.char_indices() {
        if ch != '-' && !ch.is_ascii_alphabetic() {
            return Err(ParseError {
                pos,
                msg: format!("invalid character '{ch}': expected ASCII letters or '-'"),
            });
        }
    }
    let groups: Vec<&str> = s.split('-').collect();
    if groups.len() != 3 {
        return Err(ParseError {
            pos: s.len(),
            msg: format!("expected three '-'-separated label groups, found {}", groups.len()),
        });
    }

    // byte position of a label's first occurrence, for error reporting
    let pos_of = |label: char| s.char_indices().find(|&(_, c)| c == label).map(|(p, _)| p);

    for (gi, group) in groups.iter().enumerate() {
        let mut offset = 0;
        for g in groups.iter().take(gi) {
            offset += g.len() + 1;
        }
        for (i, ch) in group.char_indices() {
            if group[..i].contains(ch) {
                return Err(ParseError {
                    pos: offset + i,
                    msg: format!("label '{ch}' repeats within one tensor"),
                });
            }
        }
    }

    let all: BTreeSet<char> = s.chars().filter(|c| *c != '-').collect();
    for label in all {
        let count = groups.iter().filter(|g| g.contains(label)).count();
        if count != 2 {
            return Err(ParseError {
                pos: pos_of(label).unwrap_or(0),
                msg: format!("label '{label}' appears in {count} tensors, expected exactly 2"),
            });
        }
    }

    Ok(ContractionSpec {
        labels_c: groups[0].to_string(),
        labels_a: groups[1].to_string(),
        labels_b: groups[2].to_string(),
    })
}
