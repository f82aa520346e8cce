//! Back-mapping of solutions and its sidecar text format.
//!
//! ```text
//! mmlp-backmap 1
//! multiplier <value>
//! embed <original agents> <kept agent>...
//! truncate <agents before> <agents kept>
//! degree <max constraint size per agent>...
//! copies <agents before> <copy,copy,...>...
//! divide <scale per agent>...
//! ```
//!
//! Step lines appear in transformation order and are applied in reverse.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::Solution;

#[derive(Clone, Debug, PartialEq)]
pub enum BackStep {
    /// Scatter a reduced solution into the original agents; others get 0.
    Embed { original: usize, kept: Vec<usize> },
    /// Keep the first `keep` of `from` agents.
    Truncate { from: usize, keep: usize },
    /// `x_v = 2 x'_v / max_degree[v]`.
    Degree { max_degree: Vec<usize> },
    /// `x_v` is the maximum over the copies `groups[v]` of `from` agents.
    MaxOfCopies {
        from: usize,
        groups: Vec<Vec<usize>>,
    },
    /// `x_v = x'_v / coef[v]`.
    Divide { coef: Vec<f64> },
}

impl BackStep {
    /// Number of agents of the transformed instance.
    pub fn input_len(&self) -> usize {
        match self {
            BackStep::Embed { kept, .. } => kept.len(),
            BackStep::Truncate { from, .. } | BackStep::MaxOfCopies { from, .. } => *from,
            BackStep::Degree { max_degree } => max_degree.len(),
            BackStep::Divide { coef } => coef.len(),
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            BackStep::Embed { original, .. } => *original,
            BackStep::Truncate { keep, .. } => *keep,
            BackStep::Degree { max_degree } => max_degree.len(),
            BackStep::MaxOfCopies { groups, .. } => groups.len(),
            BackStep::Divide { coef } => coef.len(),
        }
    }

    pub fn apply(&self, x: &Solution) -> Result<Solution> {
        if x.len() != self.input_len() {
            return Err(Error::DimensionMismatch(format!(
                "back-map step expects {} values, got {}",
                self.input_len(),
                x.len()
            )));
        }
        let v = &x.values;
        let values = match self {
            BackStep::Embed { original, kept } => {
                let mut out = vec![0.0; *original];
                for (j, &o) in kept.iter().enumerate() {
                    out[o] = v[j];
                }
                out
            }
            BackStep::Truncate { keep, .. } => v[..*keep].to_vec(),
            BackStep::Degree { max_degree } => v
                .iter()
                .zip(max_degree)
                .map(|(&x, &m)| 2.0 * x / m as f64)
                .collect(),
            BackStep::MaxOfCopies { groups, .. } => groups
                .iter()
                .map(|g| g.iter().map(|&j| v[j]).fold(f64::NEG_INFINITY, f64::max))
                .collect(),
            BackStep::Divide { coef } => v.iter().zip(coef).map(|(&x, &c)| x / c).collect(),
        };
        Ok(Solution::new(values))
    }
}

/// Steps in transformation order plus the ratio multiplier they cost.
#[derive(Clone, Debug, PartialEq)]
pub struct BackMap {
    pub steps: Vec<BackStep>,
    pub multiplier: f64,
}

impl BackMap {
    pub fn new(steps: Vec<BackStep>, multiplier: f64) -> Self {
        BackMap { steps, multiplier }
    }

    /// Prepends a step that runs last when mapping back.
    pub fn with_embedding(mut self, original: usize, kept: Vec<usize>) -> Self {
        self.steps.insert(0, BackStep::Embed { original, kept });
        self
    }

    pub fn apply(&self, x: &Solution) -> Result<Solution> {
        let mut x = x.clone();
        for step in self.steps.iter().rev() {
            x = step.apply(&x)?;
        }
        Ok(x)
    }
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| format!(" {x}")).collect()
}

pub fn serialize_backmap(map: &BackMap) -> String {
    let mut out = String::new();
    writeln!(out, "mmlp-backmap 1").unwrap();
    writeln!(out, "multiplier {:?}", map.multiplier).unwrap();
    for step in &map.steps {
        let line = match step {
            BackStep::Embed { original, kept } => format!("embed {original}{}", join(kept.iter())),
            BackStep::Truncate { from, keep } => format!("truncate {from} {keep}"),
            BackStep::Degree { max_degree } => format!("degree{}", join(max_degree.iter())),
            BackStep::MaxOfCopies { from, groups } => {
                let groups = groups
                    .iter()
                    .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
                format!("copies {from}{}", join(groups))
            }
            BackStep::Divide { coef } => {
                format!("divide{}", join(coef.iter().map(|c| format!("{c:?}"))))
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    out
}

pub fn parse_backmap(text: &str) -> Result<BackMap> {
    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| {
            (
                n + 1,
                l.split('#')
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, f)| !f.is_empty());
    let (n, header) = lines.next().ok_or_else(|| err(1, "empty back-map"))?;
    if header != ["mmlp-backmap", "1"] {
        return Err(err(n, "expected header `mmlp-backmap 1`"));
    }
    let (n, fields) = lines.next().ok_or_else(|| err(n, "missing multiplier"))?;
    let multiplier = match fields.as_slice() {
        ["multiplier", m] => m.parse::<f64>().map_err(|_| err(n, "bad multiplier"))?,
        _ => return Err(err(n, "expected `multiplier <value>`")),
    };
    let mut steps = Vec::new();
    for (n, fields) in lines {
        let nums = |s: &[&str]| -> Result<Vec<usize>> {
            s.iter()
                .map(|x| x.parse::<usize>().map_err(|_| err(n, "bad integer")))
                .collect()
        };
        let step = match fields[0] {
            "embed" => {
                let all = nums(&fields[1..])?;
                let (&original, kept) = all
                    .split_first()
                    .ok_or_else(|| err(n, "embed needs a size"))?;
                if kept.iter().any(|&k| k >= original) {
                    return Err(err(n, "embedded agent out of range"));
                }
                BackStep::Embed {
                    original,
                    kept: kept.to_vec(),
                }
            }
            "truncate" => match nums(&fields[1..])?.as_slice() {
                &[from, keep] if keep <= from => BackStep::Truncate { from, keep },
                _ => return Err(err(n, "expected `truncate <from> <keep>`")),
            },
            "degree" => {
                let max_degree = nums(&fields[1..])?;
                if max_degree.contains(&0) {
                    return Err(err(n, "degrees must be positive"));
                }
                BackStep::Degree { max_degree }
            }
            "copies" => {
                let from: usize = fields
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(n, "bad size"))?;
                let mut groups = Vec::new();
                for g in &fields[2..] {
                    let group = nums(&g.split(',').collect::<Vec<_>>())?;
                    if group.iter().any(|&j| j >= from) {
                        return Err(err(n, "copy index out of range"));
                    }
                    groups.push(group);
                }
                BackStep::MaxOfCopies { from, groups }
            }
            "divide" => {
                let coef = fields[1..]
                    .iter()
                    .map(|x| x.parse::<f64>().map_err(|_| err(n, "bad coefficient")))
                    .collect::<Result<Vec<_>>>()?;
                BackStep::Divide { coef }
            }
            other => return Err(err(n, &format!("unknown step `{other}`"))),
        };
        steps.push(step);
    }
    for pair in steps.windows(2) {
        if pair[0].input_len() != pair[1].output_len() {
            return Err(Error::DimensionMismatch(
                "consecutive back-map steps disagree on agent count".into(),
            ));
        }
    }
    Ok(BackMap { steps, multiplier })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BackMap {
        BackMap::new(
            vec![
                BackStep::Truncate { from: 5, keep: 2 },
                BackStep::Degree {
                    max_degree: vec![2, 3, 3, 2, 2],
                },
                BackStep::MaxOfCopies {
                    from: 6,
                    groups: vec![vec![0, 5], vec![1], vec![2], vec![3], vec![4]],
                },
                BackStep::Divide {
                    coef: vec![1.0, 2.0, 0.5, 1.0, 1.0, 4.0],
                },
            ],
            1.5,
        )
        .with_embedding(3, vec![0, 2])
    }

    #[test]
    fn round_trip() {
        let map = sample();
        let text = serialize_backmap(&map);
        assert!(text.starts_with("mmlp-backmap 1\nmultiplier 1.5\nembed 3 0 2\n"));
        assert_eq!(parse_backmap(&text).unwrap(), map);
    }

    #[test]
    fn applies_in_reverse() {
        let x = Solution::new(vec![0.2, 0.4, 0.1, 0.0, 0.0, 0.8]);
        let y = sample().apply(&x).unwrap();
        // divide: (0.2, 0.2, 0.2, 0, 0, 0.2); copies: (0.2, 0.2, 0.2, 0, 0);
        // degree: (0.2, 0.4/3, ...); truncate: 2; embed into 3.
        assert_eq!(y.values, vec![0.2, 0.0, 2.0 * 0.2 / 3.0]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(
            sample().apply(&Solution::zeros(4)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(parse_backmap("mmlp-backmap 1\nmultiplier 1\ntruncate 3 2\ndivide 1 1\n").is_err());
    }
}
