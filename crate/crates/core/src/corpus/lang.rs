//! Character-trigram language identification using rank-order ("out-of-place")
//! profile distances.
//!
//! Profiles are frozen text files under `data/profiles/`, one trigram per line
//! in rank order, with `_` standing for the word-boundary space. They are
//! generated by `tools/build_lang_profiles.py` from word-frequency tables.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Number of ranked trigrams kept in every profile.
pub const PROFILE_SIZE: usize = 2000;

/// Texts with fewer alphabetic characters than this are left undetermined.
pub const MIN_ALPHA_CHARS: usize = 20;

pub const UNDETERMINED: &str = "und";

const BUNDLED: [(&str, &str); 5] = [
    ("de", include_str!("../../data/profiles/de.txt")),
    ("en", include_str!("../../data/profiles/en.txt")),
    ("es", include_str!("../../data/profiles/es.txt")),
    ("fr", include_str!("../../data/profiles/fr.txt")),
    ("pt", include_str!("../../data/profiles/pt.txt")),
];

/// Counts padded character trigrams of every alphabetic run in `text`.
///
/// Words are lowercased and wrapped in single spaces, so "the" yields
/// `" th"`, `"the"` and `"he "`.
pub fn trigram_counts(text: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for word in text
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
    {
        let mut chars = vec![' '];
        chars.extend(word.chars().flat_map(char::to_lowercase));
        chars.push(' ');
        for window in chars.windows(3) {
            *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    counts
}

/// Ranks trigrams by descending count (ties lexicographic) and keeps the top `size`.
pub fn ranked_trigrams(text: &str, size: usize) -> Vec<String> {
    let mut counts: Vec<(String, usize)> = trigram_counts(text).into_iter().collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    counts.truncate(size);
    counts.into_iter().map(|(g, _)| g).collect()
}

#[derive(Debug, Clone)]
pub struct LanguageProfile {
    code: String,
    ranks: HashMap<String, usize>,
    len: usize,
}

impl LanguageProfile {
    pub fn from_ranked(code: impl Into<String>, trigrams: Vec<String>) -> Self {
        let len = trigrams.len();
        let ranks = trigrams
            .into_iter()
            .enumerate()
            .map(|(rank, g)| (g, rank))
            .collect();
        LanguageProfile {
            code: code.into(),
            ranks,
            len,
        }
    }

    /// Parses the on-disk format: one trigram per line, `_` for space.
    pub fn parse(code: impl Into<String>, contents: &str) -> Self {
        let trigrams = contents
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.replace('_', " "))
            .collect();
        Self::from_ranked(code, trigrams)
    }

    pub fn to_file_contents(trigrams: &[String]) -> String {
        let mut out = String::new();
        for g in trigrams {
            out.push_str(&g.replace(' ', "_"));
            out.push('\n');
        }
        out
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Out-of-place distance of a ranked document profile to this profile.
    /// Missing trigrams cost the profile length.
    pub fn distance(&self, doc_ranked: &[String]) -> usize {
        doc_ranked
            .iter()
            .enumerate()
            .map(|(rank, g)| match self.ranks.get(g) {
                Some(&r) => rank.abs_diff(r),
                None => self.len,
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct LanguageDetector {
    profiles: Vec<LanguageProfile>,
}

impl LanguageDetector {
    pub fn new(mut profiles: Vec<LanguageProfile>) -> Self {
        profiles.sort_by(|a, b| a.code.cmp(&b.code));
        LanguageDetector { profiles }
    }

    /// The detector built from the profiles shipped with the crate.
    pub fn bundled() -> &'static LanguageDetector {
        static DETECTOR: OnceLock<LanguageDetector> = OnceLock::new();
        DETECTOR.get_or_init(|| {
            LanguageDetector::new(
                BUNDLED
                    .iter()
                    .map(|(code, contents)| LanguageProfile::parse(*code, contents))
                    .collect(),
            )
        })
    }

    pub fn profiles(&self) -> &[LanguageProfile] {
        &self.profiles
    }

    /// Returns the closest language and a confidence `1 - d / d_max`, where
    /// `d_max` is the distance if no document trigram occurred in the profile.
    pub fn detect(&self, text: &str) -> (String, f64) {
        let alpha = text.chars().filter(|c| c.is_alphabetic()).count();
        if alpha < MIN_ALPHA_CHARS || self.profiles.is_empty() {
            return (UNDETERMINED.to_string(), 0.0);
        }
        let size = self.profiles.iter().map(|p| p.len).max().unwrap_or(0);
        let doc = ranked_trigrams(text, size);

        let mut best: Option<(&LanguageProfile, usize)> = None;
        for profile in &self.profiles {
            let d = profile.distance(&doc);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((profile, d));
            }
        }
        let (profile, d) = best.expect("at least one profile");
        let max_distance = doc.len() * profile.len;
        if max_distance == 0 {
            return (UNDETERMINED.to_string(), 0.0);
        }
        let confidence = 1.0 - d as f64 / max_distance as f64;
        (profile.code.clone(), confidence.clamp(0.0, 1.0))
    }
}

/// Detects the language of `text` with the bundled profiles.
pub fn detect_language(text: &str) -> (String, f64) {
    LanguageDetector::bundled().detect(text)
}
