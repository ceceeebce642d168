//! Body extraction for raw RFC 822 messages.

use mailparse::{parse_mail, ParsedMail};

/// Returns the first `text/plain` part, else the first `text/html` part with
/// tags removed, else `None` (not a parseable message or no text part).
pub fn extract_body(raw: &[u8]) -> Option<String> {
    let mail = parse_mail(raw).ok()?;
    if let Some(plain) = find_part(&mail, "text/plain") {
        return Some(plain);
    }
    find_part(&mail, "text/html").map(|html| strip_tags(&html))
}

fn find_part(part: &ParsedMail<'_>, mimetype: &str) -> Option<String> {
    if part.subparts.is_empty() {
        if part.ctype.mimetype.eq_ignore_ascii_case(mimetype) {
            return part.get_body().ok();
        }
        return None;
    }
    part.subparts.iter().find_map(|p| find_part(p, mimetype))
}

/// Removes markup by dropping everything between `<` and `>`, plus the
/// contents of `<script>` and `<style>` elements. Tags become spaces so
/// adjacent words do not fuse.
pub fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut rest = html;
    while let Some(start) = rest.find('<') {
        out.push_str(&rest[..start]);
        out.push(' ');
        let after = &rest[start..];
        let lower_head: String = after.chars().take(8).collect::<String>().to_ascii_lowercase();
        let skip_to = if lower_head.starts_with("<script") {
            find_ci(after, "</script>").map(|i| i + "</script>".len())
        } else if lower_head.starts_with("<style") {
            find_ci(after, "</style>").map(|i| i + "</style>".len())
        } else {
            after.find('>').map(|i| i + 1)
        };
        match skip_to {
            Some(n) => rest = &after[n..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    decode_entities(&out)
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.to_ascii_lowercase().find(needle)
}

fn decode_entities(s: &str) -> String {
    s.replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&")
}
