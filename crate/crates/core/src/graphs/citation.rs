use super::Graph;
use crate::matching::MatchResult;
use crate::Result;

/// Directed citing → cited graph over all papers; edge weight is the match
/// score. Repeated matches collapse into one edge.
pub fn build_citation_graph<S: AsRef<str>>(paper_ids: &[S], matches: &[MatchResult]) -> Result<Graph> {
    let mut g = Graph::new(paper_ids.iter().map(|s| s.as_ref().to_string()), true)?;
    for m in matches {
        g.add_edge(&m.citing_id, &m.cited_id, f64::from(m.score))?;
    }
    Ok(g)
}
