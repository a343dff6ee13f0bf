//! Fixed list of 50 common English function words, shipped as a data file.
//! Used by mention detection (single-stopword surfaces never match) and by
//! bag-of-words embedding (stopword tokens are dropped).

use std::collections::BTreeSet;
use std::sync::OnceLock;

const STOPWORDS_FILE: &str = include_str!("../data/stopwords.txt");

pub fn stopwords() -> &'static BTreeSet<&'static str> {
    static SET: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_FILE
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifty_words() {
        assert_eq!(stopwords().len(), 50);
        assert!(is_stopword("the"));
        assert!(!is_stopword("theater"));
    }
}
