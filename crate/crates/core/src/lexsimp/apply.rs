use std::collections::{BTreeMap, BTreeSet};

use super::{cosine, ContextVector, LexRule, LexRuleTable, Stopwords, WINDOW};
use crate::drs::{SemanticGraph, Token};

/// Score of leaving one token as it is.
pub const DEFAULT_KAPPA: f64 = 0.05;

/// One possible rule application in a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub start: usize,
    pub len: usize,
    pub rule: LexRule,
    pub score: f64,
}

impl Instance {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Local context vector around `tokens[start..start + len]`.
fn local_context(tokens: &[String], start: usize, len: usize, stop: &Stopwords) -> ContextVector {
    let lo = start.saturating_sub(WINDOW);
    let hi = (start + len + WINDOW).min(tokens.len());
    let mut v = ContextVector::new();
    for (j, t) in tokens.iter().enumerate().take(hi).skip(lo) {
        if (start..start + len).contains(&j) || !stop.is_content(t) {
            continue;
        }
        *v.entry(t.clone()).or_insert(0) += 1;
    }
    v
}

fn lowercase(sentence: &[&str]) -> Vec<String> {
    sentence.iter().map(|t| t.to_lowercase()).collect()
}

/// Adequacy of applying `rule` at `position`: cosine between the rule's
/// simple-word vector and the instance's local context, times the rule's
/// corpus similarity.
pub fn score_substitution(
    rule: &LexRule,
    table: &LexRuleTable,
    sentence: &[&str],
    position: usize,
    stop: &Stopwords,
) -> f64 {
    let Some(vector) = table.vector(&rule.simple) else {
        return 0.0;
    };
    let tokens = lowercase(sentence);
    let len = rule.complex_tokens().len();
    cosine(vector, &local_context(&tokens, position, len, stop)) * rule.similarity
}

/// All rule instances in `sentence`. At each position only the longest
/// matching complex key is considered.
pub fn candidate_instances(sentence: &[&str], table: &LexRuleTable, stop: &Stopwords) -> Vec<Instance> {
    let tokens = lowercase(sentence);
    let max_len = table.max_key_len();
    let mut out = Vec::new();
    for start in 0..tokens.len() {
        let longest = (1..=max_len.min(tokens.len() - start))
            .rev()
            .map(|len| (len, tokens[start..start + len].join(" ")))
            .find(|(_, key)| !table.lookup(key).is_empty());
        let Some((len, key)) = longest else { continue };
        let context = local_context(&tokens, start, len, stop);
        for rule in table.lookup(&key) {
            let score = table
                .vector(&rule.simple)
                .map_or(0.0, |v| cosine(v, &context) * rule.similarity);
            out.push(Instance {
                start,
                len,
                rule: rule.clone(),
                score,
            });
        }
    }
    out
}

/// Two instances clash when they overlap, or when they lie within one
/// context window and either one's complex words are context features of the
/// other's simple word.
pub fn conflicts(a: &Instance, b: &Instance, table: &LexRuleTable) -> bool {
    let (first, second) = if a.start <= b.start { (a, b) } else { (b, a) };
    if second.start < first.end() {
        return true;
    }
    if second.start - (first.end() - 1) > WINDOW {
        return false;
    }
    let depends = |x: &Instance, y: &Instance| {
        table
            .vector(&y.rule.simple)
            .is_some_and(|v| x.rule.complex_tokens().iter().any(|w| v.contains_key(*w)))
    };
    depends(first, second) || depends(second, first)
}

/// Objective of a substitution set: instance scores plus `kappa` for every
/// token left untouched. Summed in sentence order.
pub fn total_score(sentence_len: usize, chosen: &[&Instance], kappa: f64) -> f64 {
    let mut chosen: Vec<&Instance> = chosen.to_vec();
    chosen.sort_by_key(|i| i.start);
    let covered: usize = chosen.iter().map(|i| i.len).sum();
    let mut total = 0.0;
    for inst in chosen {
        total += inst.score;
    }
    total + kappa * (sentence_len - covered) as f64
}

/// Live chosen instances mapped to (gain over keeping everything, chosen path).
type States = BTreeMap<Vec<usize>, (f64, Vec<usize>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct LexPlan {
    pub instances: Vec<Instance>,
    /// Indices into `instances`, in sentence order.
    pub chosen: Vec<usize>,
    pub total: f64,
}

/// Left-to-right dynamic program over positions. The state is the set of
/// chosen instances still close enough to clash with a later one; at each
/// position the program either keeps the token or applies one instance
/// starting there. On equal objective, keeping wins.
pub fn plan_substitutions(sentence: &[&str], table: &LexRuleTable, stop: &Stopwords, kappa: f64) -> LexPlan {
    let instances = candidate_instances(sentence, table, stop);
    let n = sentence.len();
    let by_start = useful_instances(&instances, table, kappa);

    let mut states: States = BTreeMap::from([(Vec::new(), (0.0, Vec::new()))]);
    for p in 0..n {
        let starting = by_start.get(&p).map(Vec::as_slice).unwrap_or(&[]);
        let mut next: States = BTreeMap::new();
        let mut offer = |live: Vec<usize>, value: f64, path: Vec<usize>| {
            // instances ending more than a window before p + 1 can no longer clash
            let live: Vec<usize> = live
                .into_iter()
                .filter(|&i| instances[i].end() - 1 + WINDOW > p)
                .collect();
            match next.get(&live) {
                Some((best, _)) if *best >= value => {}
                _ => {
                    next.insert(live, (value, path));
                }
            }
        };
        for (live, (value, path)) in &states {
            offer(live.clone(), *value, path.clone());
            for &i in starting {
                if live.iter().any(|&j| conflicts(&instances[i], &instances[j], table)) {
                    continue;
                }
                let inst = &instances[i];
                let gain = inst.score - kappa * inst.len as f64;
                let mut live2 = live.clone();
                live2.push(i);
                live2.sort_unstable();
                let mut path2 = path.clone();
                path2.push(i);
                offer(live2, value + gain, path2);
            }
        }
        states = prune_dominated(next);
    }

    let mut best: Option<&(f64, Vec<usize>)> = None;
    for candidate in states.values() {
        let replace = match best {
            None => true,
            Some((value, path)) => candidate.0 > *value || (candidate.0 == *value && candidate.1.len() < path.len()),
        };
        if replace {
            best = Some(candidate);
        }
    }
    let chosen = best.map(|(_, p)| p.clone()).unwrap_or_default();
    let refs: Vec<&Instance> = chosen.iter().map(|&i| &instances[i]).collect();
    let total = total_score(n, &refs, kappa);
    LexPlan {
        instances,
        chosen,
        total,
    }
}

/// Instances worth considering, grouped by start. A non-positive gain never
/// beats leaving the tokens alone, and an instance is dropped when another
/// one at the same start gains at least as much while clashing with a subset
/// of what it clashes with; swapping it in keeps any solution feasible.
fn useful_instances(instances: &[Instance], table: &LexRuleTable, kappa: f64) -> BTreeMap<usize, Vec<usize>> {
    let gain = |i: usize| instances[i].score - kappa * instances[i].len as f64;
    let positive: Vec<usize> = (0..instances.len()).filter(|&i| gain(i) > 0.0).collect();
    let reach = table.max_key_len() + WINDOW;
    // clashes outside the instance's own start, which always clash
    let clashes: BTreeMap<usize, BTreeSet<usize>> = positive
        .iter()
        .map(|&i| {
            let a = &instances[i];
            let set = positive
                .iter()
                .copied()
                .filter(|&j| {
                    let b = &instances[j];
                    b.start != a.start && a.start.abs_diff(b.start) <= reach && conflicts(a, b, table)
                })
                .collect();
            (i, set)
        })
        .collect();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &positive {
        groups.entry(instances[i].start).or_default().push(i);
    }
    for group in groups.values_mut() {
        let all = group.clone();
        group.retain(|&b| {
            !all.iter().any(|&a| {
                a != b
                    && gain(a) >= gain(b)
                    && clashes[&a].is_subset(&clashes[&b])
                    && (gain(a) > gain(b) || clashes[&a] != clashes[&b] || a < b)
            })
        });
    }
    groups
}

/// Drops every state matched or beaten by a state whose live set is a
/// subset of its own: the smaller set admits every continuation the larger
/// one does.
fn prune_dominated(states: States) -> States {
    let mut by_size: Vec<_> = states.into_iter().collect();
    by_size.sort_by_key(|(live, _)| live.len());
    let mut kept: Vec<(Vec<usize>, _)> = Vec::with_capacity(by_size.len());
    for (live, entry) in by_size {
        let dominated = kept.iter().any(|(other, (value, _)): &(Vec<usize>, (f64, Vec<usize>))| {
            other.len() < live.len() && *value >= entry.0 && other.iter().all(|i| live.binary_search(i).is_ok())
        });
        if !dominated {
            kept.push((live, entry));
        }
    }
    kept.into_iter().collect()
}

/// A span replacement decided by the planner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub start: usize,
    pub len: usize,
    pub replacement: Vec<String>,
}

impl LexPlan {
    /// Chosen substitutions, carrying over a leading capital from the
    /// replaced text.
    pub fn substitutions(&self, sentence: &[&str]) -> Vec<Substitution> {
        self.chosen
            .iter()
            .map(|&i| {
                let inst = &self.instances[i];
                let mut replacement: Vec<String> = inst.rule.simple_tokens().iter().map(|s| s.to_string()).collect();
                let capital = sentence[inst.start].chars().next().is_some_and(char::is_uppercase);
                if capital {
                    if let Some(first) = replacement.first_mut() {
                        let mut chars = first.chars();
                        if let Some(c) = chars.next() {
                            *first = c.to_uppercase().chain(chars).collect();
                        }
                    }
                }
                Substitution {
                    start: inst.start,
                    len: inst.len,
                    replacement,
                }
            })
            .collect()
    }
}

/// Applies the best substitution set to a tokenized sentence.
pub fn simplify_lexical(sentence: &[&str], table: &LexRuleTable, stop: &Stopwords, kappa: f64) -> Vec<String> {
    let plan = plan_substitutions(sentence, table, stop, kappa);
    apply_to_tokens(sentence, &plan.substitutions(sentence))
}

fn apply_to_tokens(sentence: &[&str], subs: &[Substitution]) -> Vec<String> {
    let mut out = Vec::with_capacity(sentence.len());
    let mut i = 0;
    let mut subs = subs.iter().peekable();
    while i < sentence.len() {
        match subs.peek() {
            Some(s) if s.start == i => {
                out.extend(s.replacement.iter().cloned());
                i += s.len;
                subs.next();
            }
            _ => {
                out.push(sentence[i].to_string());
                i += 1;
            }
        }
    }
    out
}

/// Rewrites a semantic graph in place of re-parsing the simplified sentence.
///
/// Token surfaces are replaced and positions renumbered. A predicate lying
/// wholly inside a replaced span takes the replacement words as its lemma.
/// When a replacement is longer than its span the extra tokens join the
/// predicate that owned the span's last token; when shorter, the surplus
/// positions disappear.
pub fn apply_to_graph(g: &SemanticGraph, subs: &[Substitution]) -> SemanticGraph {
    if subs.is_empty() {
        return g.clone();
    }
    let mut subs: Vec<&Substitution> = subs.iter().collect();
    subs.sort_by_key(|s| s.start);

    let mut tokens: Vec<Token> = Vec::new();
    let mut remap: Vec<Option<usize>> = vec![None; g.tokens.len()];
    // old position -> extra new positions glued onto it
    let mut extra: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let push = |surface: String, tokens: &mut Vec<Token>| {
        let index = tokens.len();
        tokens.push(Token { index, surface });
        index
    };

    let mut i = 0;
    let mut next = subs.iter().peekable();
    while i < g.tokens.len() {
        match next.peek() {
            Some(s) if s.start == i => {
                let s = next.next().expect("peeked");
                let m = s.len.min(g.tokens.len() - i);
                spans.push((i, i + m));
                for (k, word) in s.replacement.iter().enumerate() {
                    let at = push(word.clone(), &mut tokens);
                    if k < m {
                        remap[i + k] = Some(at);
                    } else if m > 0 {
                        extra.entry(i + m - 1).or_default().push(at);
                    }
                }
                i += m.max(1);
            }
            _ => {
                remap[i] = Some(push(g.tokens[i].surface.clone(), &mut tokens));
                i += 1;
            }
        }
    }

    let inside_span = |set: &BTreeSet<usize>| {
        !set.is_empty()
            && spans
                .iter()
                .any(|&(a, b)| set.iter().all(|p| (a..b).contains(p)))
    };
    let renumber = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for p in set {
            if let Some(Some(q)) = remap.get(*p) {
                out.insert(*q);
            }
            if let Some(more) = extra.get(p) {
                out.extend(more.iter().copied());
            }
        }
        out
    };

    let mut out = g.clone();
    out.tokens = tokens;
    for node in out.nodes.values_mut() {
        for pred in &mut node.preds {
            let replaced = inside_span(&pred.positions);
            pred.positions = renumber(&pred.positions);
            if replaced && !pred.positions.is_empty() {
                let words: Vec<String> = pred.positions.iter().map(|&p| out.tokens[p].surface.to_lowercase()).collect();
                pred.lemma = words.join(" ");
            }
        }
        for (_, p) in node.named.iter_mut().chain(node.timex.iter_mut()) {
            if let Some(Some(q)) = remap.get(*p) {
                *p = *q;
            }
        }
    }
    for edge in &mut out.edges {
        edge.positions = renumber(&edge.positions);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::{realize, Node, NodeKind, Predicate};

    fn rule(c: &str, s: &str, sim: f64) -> LexRule {
        LexRule {
            complex: c.into(),
            simple: s.into(),
            similarity: sim,
            gain: 2.0,
        }
    }

    fn vec_of(words: &[&str]) -> ContextVector {
        words.iter().map(|w| (w.to_string(), 1)).collect()
    }

    #[test]
    fn orthogonal_context_scores_zero() {
        let mut t = LexRuleTable::default();
        t.insert(rule("published", "wrote", 0.8));
        t.set_vector("wrote", vec_of(&["letter"]));
        let s = ["peter", "published", "papers"];
        assert_eq!(score_substitution(&t.lookup("published")[0], &t, &s, 1, &Stopwords::english()), 0.0);
    }

    #[test]
    fn identical_context_scores_rule_similarity() {
        let mut t = LexRuleTable::default();
        t.insert(rule("published", "wrote", 0.8));
        t.set_vector("wrote", vec_of(&["peter", "papers"]));
        let s = ["peter", "published", "papers"];
        let score = score_substitution(&t.lookup("published")[0], &t, &s, 1, &Stopwords::english());
        assert!((score - 0.8).abs() < 1e-12);
    }

    #[test]
    fn no_rules_is_identity() {
        let t = LexRuleTable::default();
        let s = ["a", "b"];
        assert_eq!(simplify_lexical(&s, &t, &Stopwords::english(), DEFAULT_KAPPA), ["a", "b"]);
    }

    #[test]
    fn low_adequacy_keeps_the_word() {
        let mut t = LexRuleTable::default();
        t.insert(rule("published", "wrote", 0.04));
        t.set_vector("wrote", vec_of(&["peter", "papers"]));
        let s = ["peter", "published", "papers"];
        // 0.04 < kappa
        assert_eq!(simplify_lexical(&s, &t, &Stopwords::english(), DEFAULT_KAPPA), s);
    }

    #[test]
    fn multiword_keys_match_longest_first() {
        let mut t = LexRuleTable::default();
        t.insert(rule("spin-zero boson", "elementary particle", 1.0));
        t.insert(rule("boson", "thing", 1.0));
        t.set_vector("elementary particle", vec_of(&["massive"]));
        t.set_vector("thing", vec_of(&["massive"]));
        let s = ["a", "massive", "spin-zero", "boson"];
        let inst = candidate_instances(&s, &t, &Stopwords::english());
        assert_eq!(inst.iter().filter(|i| i.start == 2).count(), 1);
        let out = simplify_lexical(&s, &t, &Stopwords::english(), DEFAULT_KAPPA);
        assert_eq!(out, ["a", "massive", "elementary", "particle"]);
    }

    #[test]
    fn capitalization_is_carried_over() {
        let mut t = LexRuleTable::default();
        t.insert(rule("published", "wrote", 1.0));
        t.set_vector("wrote", vec_of(&["papers"]));
        let out = simplify_lexical(&["Published", "papers"], &t, &Stopwords::english(), DEFAULT_KAPPA);
        assert_eq!(out, ["Wrote", "papers"]);
    }

    #[test]
    fn dependent_neighbours_conflict() {
        let mut t = LexRuleTable::default();
        t.insert(rule("utilize", "use", 1.0));
        t.insert(rule("commence", "start", 1.0));
        // "start" is scored against contexts containing "utilize"
        t.set_vector("use", vec_of(&["tools"]));
        t.set_vector("start", vec_of(&["utilize"]));
        let a = Instance { start: 0, len: 1, rule: rule("utilize", "use", 1.0), score: 0.5 };
        let b = Instance { start: 3, len: 1, rule: rule("commence", "start", 1.0), score: 0.5 };
        assert!(conflicts(&a, &b, &t));
        let far = Instance { start: 12, ..b.clone() };
        assert!(!conflicts(&a, &far, &t));
        let overlap = Instance { start: 0, ..b };
        assert!(conflicts(&a, &overlap, &t));
    }

    fn graph() -> SemanticGraph {
        let mut g = SemanticGraph::new("g", &["a", "spin-zero", "boson", "appeared"]);
        g.add_node(Node::new(
            "X8",
            NodeKind::Entity,
            vec![Predicate::lexical("boson", [2]), Predicate::lexical("spin-zero", [1])],
        ));
        g.add_node(Node::new("X1", NodeKind::Event, vec![Predicate::lexical("appear", [3])]));
        g.add_node(Node::new("O1", NodeKind::Orphan, vec![Predicate::lexical("a", [0])]));
        g
    }

    #[test]
    fn graph_substitution_same_length() {
        let g = graph();
        let subs = [Substitution {
            start: 1,
            len: 2,
            replacement: vec!["elementary".into(), "particle".into()],
        }];
        let h = apply_to_graph(&g, &subs);
        assert_eq!(realize(&h, &h.all_vars()), "a elementary particle appeared");
        assert_eq!(h.nodes["X8"].head_lemma(), "particle");
        assert_eq!(h.nodes["X1"].head_lemma(), "appear");
        h.check_coverage().unwrap();
    }

    #[test]
    fn graph_substitution_changes_length() {
        let g = graph();
        let longer = [Substitution {
            start: 2,
            len: 1,
            replacement: vec!["tiny".into(), "particle".into()],
        }];
        let h = apply_to_graph(&g, &longer);
        assert_eq!(realize(&h, &h.all_vars()), "a spin-zero tiny particle appeared");
        assert_eq!(h.nodes["X1"].positions(), BTreeSet::from([4]));
        h.check_coverage().unwrap();

        let shorter = [Substitution {
            start: 1,
            len: 2,
            replacement: vec!["particle".into()],
        }];
        let h = apply_to_graph(&g, &shorter);
        assert_eq!(realize(&h, &h.all_vars()), "a particle appeared");
        h.check_coverage().unwrap();
    }
}
