//! Ward hierarchical clustering, dendrogram cuts, cluster summaries for
//! review, and turning reviewed clusters into category labels.

mod linkage;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use linkage::{ward_cluster, ward_update};

use crate::corpus::{DatasetManifest, Document};
use crate::error::{Error, Result};
use crate::vectorspace::{CorpusMatrix, Vocabulary};

/// One agglomeration step. Leaves are `0..n`, the node created by merge `s`
/// is `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64, usize)", into = "(usize, usize, f64, usize)")]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

impl From<(usize, usize, f64, usize)> for Merge {
    fn from((left, right, height, size): (usize, usize, f64, usize)) -> Self {
        Merge { left, right, height, size }
    }
}

impl From<Merge> for (usize, usize, f64, usize) {
    fn from(m: Merge) -> Self {
        (m.left, m.right, m.height, m.size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Structural checks: `n - 1` merges, children defined before use and
    /// used once, sizes additive, heights finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if n == 0 || self.merges.len() != n - 1 {
            return Err(Error::Validation(format!(
                "dendrogram over {n} leaves must have {} merges, has {}",
                n.saturating_sub(1),
                self.merges.len()
            )));
        }
        let mut sizes = vec![1usize; n];
        let mut used = vec![false; 2 * n - 1];
        for (s, m) in self.merges.iter().enumerate() {
            let limit = n + s;
            for child in [m.left, m.right] {
                if child >= limit {
                    return Err(Error::Validation(format!("merge {s} references undefined node {child}")));
                }
                if std::mem::replace(&mut used[child], true) {
                    return Err(Error::Validation(format!("node {child} is merged twice")));
                }
            }
            if m.left == m.right {
                return Err(Error::Validation(format!("merge {s} joins node {} with itself", m.left)));
            }
            let size = sizes[m.left] + sizes[m.right];
            if size != m.size {
                return Err(Error::Validation(format!("merge {s} has size {} but children sum to {size}", m.size)));
            }
            if !(m.height.is_finite() && m.height >= 0.0) {
                return Err(Error::Validation(format!("merge {s} has invalid height {}", m.height)));
            }
            sizes.push(size);
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let d: Dendrogram = serde_json::from_str(&text)?;
        d.validate()?;
        Ok(d)
    }

    fn partition(&self, merges_applied: impl Iterator<Item = usize>) -> ClusterCut {
        let n = self.n_leaves;
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for s in merges_applied {
            let m = self.merges[s];
            let (l, r) = (find(&mut parent, m.left), find(&mut parent, m.right));
            parent[l] = n + s;
            parent[r] = n + s;
        }
        // leaves are scanned in order, so first sight = smallest leaf
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut assignment = Vec::with_capacity(n);
        for leaf in 0..n {
            let root = find(&mut parent, leaf);
            let id = *ids.entry(root).or_insert_with(|| {
                nodes.push(root);
                nodes.len() - 1
            });
            assignment.push(id);
        }
        ClusterCut { assignment, k: nodes.len(), nodes }
    }

    /// Undoes the last `k - 1` merges.
    pub fn cut(&self, k: usize) -> Result<ClusterCut> {
        if k == 0 || k > self.n_leaves {
            return Err(Error::InvalidK { k, n: self.n_leaves });
        }
        Ok(self.partition(0..self.n_leaves - k))
    }

    /// Applies every merge with height `<= h`.
    pub fn cut_height(&self, h: f64) -> Result<ClusterCut> {
        if h.is_nan() || h < 0.0 {
            return Err(Error::InvalidArgument(format!("cut height must be >= 0, got {h}")));
        }
        let applied: Vec<usize> = (0..self.merges.len()).filter(|&s| self.merges[s].height <= h).collect();
        Ok(self.partition(applied.into_iter()))
    }
}

/// Flat clustering of the leaves. `assignment[leaf]` is in `0..k`; ids are
/// ordered by each cluster's smallest leaf. `nodes[id]` is the dendrogram
/// node the cluster corresponds to, which stays the same across cuts that
/// keep the cluster intact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCut {
    pub assignment: Vec<usize>,
    pub k: usize,
    pub nodes: Vec<usize>,
}

impl ClusterCut {
    /// Cut from explicit assignments; node ids are left as the cluster ids.
    pub fn from_assignment(assignment: Vec<usize>) -> Self {
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        ClusterCut { assignment, k, nodes: (0..k).collect() }
    }

    pub fn index_of_node(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    /// Document id → cluster id.
    pub fn assignment_map(&self, doc_ids: &[String]) -> BTreeMap<String, usize> {
        doc_ids.iter().cloned().zip(self.assignment.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub top_terms: Vec<(String, f64)>,
    pub sample_doc_ids: Vec<String>,
}

/// Top terms by mean feature value within each cluster (ties lexicographic)
/// and the `n_samples` lexicographically smallest member ids.
pub fn summarize(
    cut: &ClusterCut,
    matrix: &CorpusMatrix,
    vocab: &Vocabulary,
    top_n: usize,
    n_samples: usize,
) -> Result<Vec<ClusterSummary>> {
    if cut.assignment.len() != matrix.len() {
        return Err(Error::Validation(format!(
            "cut covers {} documents, matrix has {}",
            cut.assignment.len(),
            matrix.len()
        )));
    }
    if matrix.dim != vocab.len() {
        return Err(Error::DimensionMismatch { expected: vocab.len(), got: matrix.dim });
    }
    let mut sums = vec![vec![0.0; vocab.len()]; cut.k];
    let mut ids: Vec<Vec<&String>> = vec![Vec::new(); cut.k];
    for ((row, &c), id) in matrix.rows.iter().zip(&cut.assignment).zip(&matrix.doc_ids) {
        for &(t, v) in &row.entries {
            sums[c][t] += v;
        }
        ids[c].push(id);
    }
    let sizes = cut.sizes();
    Ok((0..cut.k)
        .map(|c| {
            let size = sizes[c];
            let mut terms: Vec<(usize, f64)> = sums[c]
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > 0.0)
                .map(|(t, &s)| (t, s / size as f64))
                .collect();
            terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            terms.truncate(top_n);
            let mut samples = ids[c].clone();
            samples.sort();
            samples.truncate(n_samples);
            ClusterSummary {
                cluster: c,
                size,
                top_terms: terms.into_iter().map(|(t, s)| (vocab.terms()[t].clone(), s)).collect(),
                sample_doc_ids: samples.into_iter().cloned().collect(),
            }
        })
        .collect())
}

/// Labels each document with the category its cluster maps to. Several
/// clusters may map to the same category.
pub fn apply_labels(
    cut: &ClusterCut,
    docs: &[Document],
    label_map: &BTreeMap<usize, String>,
) -> Result<(Vec<Document>, DatasetManifest)> {
    if cut.assignment.len() != docs.len() {
        return Err(Error::Validation(format!(
            "cut covers {} documents, dataset has {}",
            cut.assignment.len(),
            docs.len()
        )));
    }
    let missing: Vec<usize> = cut
        .sizes()
        .iter()
        .enumerate()
        .filter(|&(c, &n)| n > 0 && !label_map.contains_key(&c))
        .map(|(c, _)| c)
        .collect();
    if !missing.is_empty() {
        return Err(Error::UnmappedClusters(missing));
    }
    let labeled: Vec<Document> = docs
        .iter()
        .zip(&cut.assignment)
        .map(|(d, &c)| Document {
            label: Some(label_map[&c].clone()),
            cluster: Some(c),
            ..d.clone()
        })
        .collect();
    let manifest = DatasetManifest::from_documents(&labeled)?;
    Ok((labeled, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::TokenDoc;
    use crate::vectorspace::{encode_corpus, Scheme, SparseVector, VectorizerConfig};

    fn three_points() -> Dendrogram {
        let rows = [0.0, 1.0, 10.0]
            .iter()
            .map(|&x| SparseVector { dim: 1, entries: if x == 0.0 { vec![] } else { vec![(0, x)] } })
            .collect();
        let m = CorpusMatrix::from_rows(vec!["a".into(), "b".into(), "c".into()], rows, 1).unwrap();
        ward_cluster(&m).unwrap()
    }

    #[test]
    fn cuts_of_three_points() {
        let d = three_points();
        assert_eq!(d.cut(3).unwrap().assignment, [0, 1, 2]);
        assert_eq!(d.cut(1).unwrap().assignment, [0, 0, 0]);
        let two = d.cut(2).unwrap();
        assert_eq!(two.assignment, [0, 0, 1]);
        assert_eq!(two.k, 2);
        assert_eq!(two.nodes, [3, 2]);
        assert_eq!(d.cut(1).unwrap().nodes, [4]);
        assert_eq!(d.cut(3).unwrap().nodes, [0, 1, 2]);
        assert!(matches!(d.cut(0), Err(Error::InvalidK { .. })));
        assert!(matches!(d.cut(4), Err(Error::InvalidK { .. })));
        assert_eq!(d.cut_height(0.5).unwrap().k, 3);
        assert_eq!(d.cut_height(1.0).unwrap().assignment, [0, 0, 1]);
        assert_eq!(d.cut_height(100.0).unwrap().k, 1);
    }

    #[test]
    fn dendrogram_json_shape() {
        let d = three_points();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["n_leaves"], 3);
        assert_eq!(v["merges"][0], serde_json::json!([0, 1, 1.0, 2]));
        let back: Dendrogram = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
        back.validate().unwrap();
    }

    #[test]
    fn invalid_dendrograms_rejected() {
        let mut d = three_points();
        d.merges[1].size = 7;
        assert!(d.validate().is_err());
        let mut d = three_points();
        d.merges[1].right = 0;
        assert!(d.validate().is_err());
        let mut d = three_points();
        d.merges.pop();
        assert!(d.validate().is_err());
    }

    fn td(id: &str, text: &str) -> TokenDoc {
        TokenDoc::new(id, text.split_whitespace().map(String::from).collect())
    }

    #[test]
    fn summaries_follow_keyword_pools() {
        let docs = vec![
            td("a1", "viagra pills pharmacy"),
            td("a2", "pills pharmacy viagra viagra"),
            td("a3", "pharmacy viagra"),
            td("b1", "lottery winner bank"),
            td("b2", "bank transfer lottery"),
            td("b3", "winner transfer bank"),
        ];
        let cfg = VectorizerConfig { max_features: 100, min_df: 1, ngram: 1, scheme: Scheme::Tfidf };
        let vocab = Vocabulary::fit(&docs, cfg).unwrap();
        let m = encode_corpus(&docs, &vocab, Scheme::Tfidf);
        let d = ward_cluster(&m).unwrap();
        let cut = d.cut(2).unwrap();
        assert_eq!(cut.assignment, [0, 0, 0, 1, 1, 1]);
        let s = summarize(&cut, &m, &vocab, 3, 2).unwrap();
        let pool_a = ["viagra", "pills", "pharmacy"];
        let pool_b = ["lottery", "winner", "bank", "transfer"];
        assert!(s[0].top_terms.iter().all(|(t, _)| pool_a.contains(&t.as_str())));
        assert!(s[1].top_terms.iter().all(|(t, _)| pool_b.contains(&t.as_str())));
        assert!(s[0].top_terms.windows(2).all(|w| w[0].1 >= w[1].1));
        assert_eq!(s[0].sample_doc_ids, ["a1", "a2"]);
        assert_eq!(s[1].size, 3);

        // clamp: more terms requested than exist
        let all = summarize(&cut, &m, &vocab, 1000, 10).unwrap();
        assert_eq!(all[0].top_terms.len(), 3);
        assert_eq!(all[1].top_terms.len(), 4);
    }

    #[test]
    fn single_term_cluster() {
        let docs = vec![td("1", "viagra"), td("2", "viagra viagra"), td("3", "casino")];
        let cfg = VectorizerConfig { max_features: 10, min_df: 1, ngram: 1, scheme: Scheme::Tfidf };
        let vocab = Vocabulary::fit(&docs, cfg).unwrap();
        let m = encode_corpus(&docs, &vocab, Scheme::Tfidf);
        let cut = ward_cluster(&m).unwrap().cut(2).unwrap();
        let s = summarize(&cut, &m, &vocab, 5, 5).unwrap();
        assert_eq!(s[0].top_terms[0].0, "viagra");
        assert_eq!(s[0].top_terms.len(), 1);
    }

    fn plain_docs(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i}"),
                text: String::new(),
                language: "en".into(),
                lang_confidence: 0.9,
                label: None,
                cluster: None,
            })
            .collect()
    }

    #[test]
    fn labels_three_clusters() {
        let cut = ClusterCut::from_assignment(vec![0, 1, 2, 0, 2, 2]);
        let map = BTreeMap::from([(0, "ht".to_string()), (1, "ps".to_string()), (2, "sc".to_string())]);
        let (docs, manifest) = apply_labels(&cut, &plain_docs(6), &map).unwrap();
        assert_eq!(manifest.categories, ["ht", "ps", "sc"]);
        assert_eq!(manifest.counts["sc"], 3);
        assert_eq!(manifest.total, 6);
        assert_eq!(docs[4].label.as_deref(), Some("sc"));
        assert_eq!(docs[4].cluster, Some(2));
    }

    #[test]
    fn merging_clusters_into_two_categories() {
        let cut = ClusterCut::from_assignment(vec![0, 1, 2, 3, 4, 4]);
        let map: BTreeMap<usize, String> =
            (0..5).map(|c| (c, if c < 2 { "a" } else { "b" }.to_string())).collect();
        let (_, manifest) = apply_labels(&cut, &plain_docs(6), &map).unwrap();
        assert_eq!(manifest.categories.len(), 2);
        assert_eq!(manifest.counts["a"], 2);
        assert_eq!(manifest.counts["b"], 4);
    }

    #[test]
    fn unmapped_cluster_is_named() {
        let cut = ClusterCut::from_assignment(vec![0, 1, 2]);
        let map = BTreeMap::from([(0, "a".to_string()), (2, "b".to_string())]);
        match apply_labels(&cut, &plain_docs(3), &map) {
            Err(Error::UnmappedClusters(ids)) => assert_eq!(ids, [1]),
            other => panic!("expected unmapped error, got {other:?}"),
        }
    }
}
