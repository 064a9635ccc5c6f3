use std::fmt;
use std::str::FromStr;

/// Strictly increasing list of levels, e.g. `8,16,32` or `1-24` or `4,8-10`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NList(Vec<usize>);

impl NList {
    pub fn levels(&self) -> &[usize] {
        &self.0
    }
}

impl FromStr for NList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out: Vec<usize> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad level {t:?}: {e}"));
            match item.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (parse(a)?, parse(b)?);
                    if a > b {
                        return Err(format!("empty range {item:?}"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(parse(item)?),
            }
        }
        if out.is_empty() {
            return Err("N-list is empty".into());
        }
        if let Some(&bad) = out.iter().find(|&&n| n == 0) {
            return Err(format!("level {bad} is not positive"));
        }
        if let Some(w) = out.windows(2).find(|w| w[0] >= w[1]) {
            return Err(format!("N-list must be strictly increasing ({} then {})", w[0], w[1]));
        }
        Ok(NList(out))
    }
}

impl fmt::Display for NList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
