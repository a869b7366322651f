//! Domain name normalization.

/// Second-level labels under which registrations happen one level deeper,
/// e.g. `tsinghua.edu.cn`.
const GENERIC_SECOND_LEVEL: &[&str] = &[
    "ac", "co", "com", "edu", "gov", "mil", "net", "org", "ne", "or", "go",
];

/// Lowercases `raw` and strips scheme, credentials, port, path, query and
/// fragment. Returns `None` when nothing usable is left or the name contains
/// whitespace.
pub fn normalize_domain(raw: &str, truncate_registrable: bool) -> Option<String> {
    let mut s = raw.trim();
    if let Some(pos) = s.find("://") {
        s = &s[pos + 3..];
    }
    let end = s.find(['/', '?', '#']).unwrap_or(s.len());
    s = &s[..end];
    if let Some(pos) = s.rfind('@') {
        s = &s[pos + 1..];
    }
    if let Some(pos) = s.rfind(':') {
        if s[pos + 1..].chars().all(|c| c.is_ascii_digit()) {
            s = &s[..pos];
        }
    }
    let s = s.trim_end_matches('.');
    if s.is_empty() || s.chars().any(char::is_whitespace) || s.contains("://") {
        return None;
    }
    let lower = s.to_lowercase();
    Some(if truncate_registrable {
        registrable_domain(&lower).to_string()
    } else {
        lower
    })
}

/// Cuts a host name down to the registrable domain: the last two labels, or
/// three when the second-to-last is a generic label under a two-letter
/// country code (`www.news.sina.com.cn` -> `sina.com.cn`).
pub fn registrable_domain(host: &str) -> &str {
    if host.parse::<std::net::Ipv4Addr>().is_ok() {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() <= 2 {
        return host;
    }
    let n = labels.len();
    let keep = if labels[n - 1].len() == 2 && GENERIC_SECOND_LEVEL.contains(&labels[n - 2]) {
        3
    } else {
        2
    };
    if n <= keep {
        return host;
    }
    let skip: usize = labels[..n - keep].iter().map(|l| l.len() + 1).sum();
    &host[skip..]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_decorations() {
        assert_eq!(normalize_domain("HTTP://Www.Baidu.com:8080/s?wd=x", false).as_deref(), Some("www.baidu.com"));
        assert_eq!(normalize_domain("qq.com", false).as_deref(), Some("qq.com"));
        assert_eq!(normalize_domain("https://user@mail.qq.com/", false).as_deref(), Some("mail.qq.com"));
        assert_eq!(normalize_domain("  ", false), None);
        assert_eq!(normalize_domain("bad domain.com", false), None);
        assert_eq!(normalize_domain("http://", false), None);
    }

    #[test]
    fn registrable_truncation() {
        assert_eq!(registrable_domain("www.news.sina.com.cn"), "sina.com.cn");
        assert_eq!(registrable_domain("blog.sina.cn"), "sina.cn");
        assert_eq!(registrable_domain("weibo.cn"), "weibo.cn");
        assert_eq!(registrable_domain("a.b.example.org"), "example.org");
        assert_eq!(registrable_domain("10.0.0.1"), "10.0.0.1");
        assert_eq!(
            normalize_domain("http://Img.Sinaimg.cn/x.png", true).as_deref(),
            Some("sinaimg.cn")
        );
    }
}
