//! Integer list arguments: `a..b` (inclusive), `a,b,c`, or mixtures such
//! as `2..4,7`.

pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty item in list {text:?}"));
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo = parse_one(lo)?;
            let hi = parse_one(hi)?;
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(parse_one(part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_one(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("not a nonnegative integer: {s:?}"))
}
