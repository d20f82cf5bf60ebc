use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ClusterAssignment, ClusterError};
use crate::preprocess::FeatureMatrix;

/// Journal quality category. The integer codes define class order everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Least = 0,
    Average = 1,
    Best = 2,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Least, Category::Average, Category::Best];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Category> {
        Category::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Least => "Least",
            Category::Average => "Average",
            Category::Best => "Best",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "least" => Ok(Category::Least),
            "average" => Ok(Category::Average),
            "best" => Ok(Category::Best),
            other => Err(format!("unknown category \"{other}\"")),
        }
    }
}

/// The citation indicators averaged into the per-cluster quality composite.
pub const DEFAULT_QUALITY_FEATURES: [&str; 9] = [
    "journal_impact_factor",
    "cite_score",
    "sjr",
    "snip",
    "hirsch_index",
    "eigenfactor_score",
    "article_influence_score",
    "immediacy_index",
    "five_year_impact_factor",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryMap {
    /// Indexed by cluster id.
    pub categories: Vec<Category>,
    pub composite: Vec<f64>,
}

impl CategoryMap {
    pub fn category_of(&self, cluster: usize) -> Category {
        self.categories[cluster]
    }

    pub fn labels_for(&self, clusters: &[usize]) -> Vec<Category> {
        clusters.iter().map(|&c| self.categories[c]).collect()
    }
}

fn composites<S: AsRef<str>>(
    x: &FeatureMatrix,
    labels: &[usize],
    quality_features: &[S],
) -> Result<Vec<f64>, ClusterError> {
    if labels.len() != x.n_rows() {
        return Err(ClusterError::LengthMismatch(labels.len(), x.n_rows()));
    }
    let cols = quality_features
        .iter()
        .map(|f| {
            x.feature_index(f.as_ref())
                .ok_or_else(|| ClusterError::UnknownFeature(f.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut sums = vec![vec![0.0; cols.len()]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, &c) in sums[l].iter_mut().zip(&cols) {
            *s += x.values.get(r, c);
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| {
            if n == 0 || s.is_empty() {
                0.0
            } else {
                s.iter().map(|v| v / n as f64).sum::<f64>() / s.len() as f64
            }
        })
        .collect())
}

/// Ordinal rank per cluster (0 = lowest composite). Ties rank the lower id higher.
pub fn rank_clusters<S: AsRef<str>>(
    x: &FeatureMatrix,
    labels: &[usize],
    quality_features: &[S],
) -> Result<(Vec<usize>, Vec<f64>), ClusterError> {
    let comp = composites(x, labels, quality_features)?;
    let k = comp.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| comp[b].total_cmp(&comp[a]).then(a.cmp(&b)));
    let mut rank = vec![0; k];
    for (pos, &c) in order.iter().enumerate() {
        rank[c] = k - 1 - pos;
    }
    Ok((rank, comp))
}

/// Map three clusters onto Best / Average / Least by their quality composite.
pub fn assign_categories<S: AsRef<str>>(
    x: &FeatureMatrix,
    labels: &[usize],
    quality_features: &[S],
) -> Result<CategoryMap, ClusterError> {
    let (rank, composite) = rank_clusters(x, labels, quality_features)?;
    if rank.len() != 3 {
        return Err(ClusterError::NotThreeClusters(rank.len()));
    }
    Ok(CategoryMap {
        categories: rank.iter().map(|&r| Category::from_code(r).unwrap()).collect(),
        composite,
    })
}

/// `row_index,cluster_id,category` lines.
pub fn write_assignment_csv<W: Write>(
    out: W,
    assignment: &ClusterAssignment,
    map: &CategoryMap,
) -> Result<(), ClusterError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| ClusterError::Csv(e.to_string());
    w.write_record(["row_index", "cluster_id", "category"]).map_err(err)?;
    for (i, &l) in assignment.labels.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string(), map.category_of(l).to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| ClusterError::Csv(e.to_string()))
}

pub fn read_assignment_csv<R: Read>(input: R) -> Result<Vec<(usize, usize, Category)>, ClusterError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| ClusterError::Csv(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse = |s: &str| s.parse::<usize>().map_err(|e| ClusterError::Csv(e.to_string()));
        out.push((
            parse(field(0))?,
            parse(field(1))?,
            field(2).parse().map_err(ClusterError::Csv)?,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::preprocess::FeatureKind;

    fn fm(rows: &[[f64; 2]]) -> FeatureMatrix {
        FeatureMatrix::new(
            Matrix::from_rows(rows),
            vec!["q".into(), "other".into()],
            vec![FeatureKind::Numeric; 2],
        )
    }

    #[test]
    fn ranks_by_composite() {
        let x = fm(&[[0.5, 0.0], [0.9, 1.0], [0.1, 0.3], [0.5, 0.2]]);
        let map = assign_categories(&x, &[0, 1, 2, 0], &["q"]).unwrap();
        assert_eq!(
            map.categories,
            vec![Category::Average, Category::Best, Category::Least]
        );
    }

    #[test]
    fn ties_favour_lower_cluster_id() {
        let x = fm(&[[0.5, 0.0], [0.5, 1.0], [0.5, 0.3]]);
        let map = assign_categories(&x, &[0, 1, 2], &["q"]).unwrap();
        assert_eq!(
            map.categories,
            vec![Category::Best, Category::Average, Category::Least]
        );
    }

    #[test]
    fn errors() {
        let x = fm(&[[0.5, 0.0], [0.5, 1.0], [0.5, 0.3]]);
        assert!(matches!(
            assign_categories(&x, &[0, 1, 2], &["nope"]),
            Err(ClusterError::UnknownFeature(_))
        ));
        assert!(matches!(
            assign_categories(&x, &[0, 1, 1], &["q"]),
            Err(ClusterError::NotThreeClusters(2))
        ));
    }

    #[test]
    fn category_order_and_parse() {
        assert!(Category::Least < Category::Average && Category::Average < Category::Best);
        assert_eq!("best".parse::<Category>().unwrap(), Category::Best);
        assert_eq!(Category::from_code(1), Some(Category::Average));
    }
}
