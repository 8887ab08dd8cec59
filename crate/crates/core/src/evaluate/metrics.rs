/// Edit distance with unit insert, delete and substitute costs over Unicode
/// scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein / max(len)`, with two empty strings scoring 1.
pub fn char_similarity(truth: &str, response: &str) -> f64 {
    let longest = truth.chars().count().max(response.chars().count());
    if longest == 0 {
        return 1.0;
    }
    (1.0 - levenshtein(truth, response) as f64 / longest as f64).max(0.0)
}

/// Trims the ends and collapses internal whitespace runs to one space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-sensitive equality after whitespace normalization.
pub fn exact_match(truth: &str, response: &str) -> bool {
    normalize_whitespace(truth) == normalize_whitespace(response)
}

/// True when the response has at least one alphanumeric character.
pub fn is_readable(response: &str) -> bool {
    response.chars().any(char::is_alphanumeric)
}
