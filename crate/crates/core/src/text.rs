//! Corpus tokenizer: lowercase, split on whitespace and punctuation, and
//! emit every CJK ideograph / kana / hangul character as its own token.

use alloc::string::String;
use alloc::vec::Vec;

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK ext A
        | 0x4E00..=0x9FFF    // CJK unified
        | 0xAC00..=0xD7AF    // hangul syllables
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0x20000..=0x2FA1F) // ext B..F, compatibility supplement
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Split `text` into lowercase tokens.
///
/// Apostrophes inside a word are kept (`don't`), leading and trailing ones
/// are trimmed.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let t = cur.trim_matches('\'');
        if !t.is_empty() {
            out.push(String::from(t));
        }
        cur.clear();
    };
    for c in text.chars() {
        if is_cjk(c) {
            flush(&mut cur, &mut out);
            out.extend(core::iter::once(c).map(|c| {
                let mut s = String::new();
                s.extend(c.to_lowercase());
                s
            }));
        } else if is_word_char(c) {
            cur.extend(c.to_lowercase());
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(tokenize("Hello, World!  again"), ["hello", "world", "again"]);
    }

    #[test]
    fn keeps_inner_apostrophes() {
        assert_eq!(tokenize("don't 'quote'"), ["don't", "quote"]);
    }

    #[test]
    fn cjk_is_per_character() {
        assert_eq!(tokenize("我爱你 ok"), ["我", "爱", "你", "ok"]);
        assert_eq!(tokenize("abc你好"), ["abc", "你", "好"]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t ... ").is_empty());
    }
}
