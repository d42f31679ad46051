use unicode_normalization::UnicodeNormalization;

/// Separator that whitespace runs inside a name collapse to.
pub const NAME_SEPARATOR: char = '.';

/// Canonical comparison form of a username.
///
/// Trims outer whitespace, applies compatibility decomposition, lowercases
/// character by character, and collapses each internal whitespace run to a
/// single `.`. Total and idempotent.
pub fn normalize(raw: &str) -> String {
    // Per-char lowercasing: `str::to_lowercase` is context sensitive (final
    // sigma), which would break idempotence.
    let lowered: String = raw
        .trim()
        .nfkd()
        .flat_map(char::to_lowercase)
        .collect::<String>()
        // Lowercasing can emit precomposed characters.
        .nfkd()
        .collect();

    let mut out = String::with_capacity(lowered.len());
    let mut in_space = false;
    // Decomposition can expose whitespace at the edges (e.g. U+00A8 → " ̈").
    for c in lowered.trim().chars() {
        if c.is_whitespace() {
            if !in_space {
                out.push(NAME_SEPARATOR);
                in_space = true;
            }
        } else {
            out.push(c);
            in_space = false;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases() {
        assert_eq!(normalize("John.Smith"), "john.smith");
    }

    #[test]
    fn fullwidth_compatibility() {
        // UCD: FF2A FULLWIDTH LATIN CAPITAL LETTER J; <wide> 004A
        assert_eq!(normalize("\u{FF2A}ohn.Smith"), "john.smith");
    }

    #[test]
    fn trims_cyrillic() {
        assert_eq!(normalize("  Іван.Петренко "), "іван.петренко");
    }

    #[test]
    fn collapses_whitespace_runs() {
        assert_eq!(normalize("ivan \t  petrenko"), "ivan.petrenko");
        assert_eq!(normalize("a b c"), "a.b.c");
        assert_eq!(normalize("a\u{00A0}b"), "a.b");
    }

    #[test]
    fn empty_and_blank() {
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("   \t"), "");
    }

    #[test]
    fn final_sigma_is_context_free() {
        let once = normalize("ΟΔΟΣ");
        assert_eq!(once, "οδοσ");
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn ligature_and_superscript() {
        assert_eq!(normalize("ﬁ"), "fi");
        assert_eq!(normalize("x²"), "x2");
    }

    #[test]
    fn decomposed_spacing_marks_stay_idempotent() {
        for s in ["x\u{00A8}", "\u{00A8}x", "a \u{00B4}b", "\u{1FED}"] {
            let once = normalize(s);
            assert_eq!(normalize(&once), once, "{s:?}");
        }
    }
}
