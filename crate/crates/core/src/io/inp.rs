//! Reader for the user-element subset of Abaqus input decks.
//!
//! Only `*USER ELEMENT`, `*NODE`, `*ELEMENT` and `*UEL PROPERTY` are accepted.
//! Keywords and parameter names are case-insensitive and `**` starts a comment
//! line. `ELEST` is read as a misspelling of `ELSET`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UserElementDef {
    pub type_name: String,
    pub nodes: usize,
    pub properties: usize,
    pub coordinates: usize,
    /// Active degree-of-freedom labels from the data line.
    pub dofs: Vec<u32>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeckNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeckElement {
    pub id: usize,
    pub type_name: String,
    pub elset: Option<String>,
    pub nodes: Vec<usize>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UelProperty {
    pub elset: String,
    pub values: Vec<f64>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeckModel {
    pub user_elements: Vec<UserElementDef>,
    pub nodes: Vec<DeckNode>,
    pub elements: Vec<DeckElement>,
    pub properties: Vec<UelProperty>,
}

impl DeckModel {
    pub fn user_element(&self, type_name: &str) -> Option<&UserElementDef> {
        self.user_elements
            .iter()
            .find(|u| u.type_name.eq_ignore_ascii_case(type_name))
    }

    pub fn property(&self, elset: &str) -> Option<&UelProperty> {
        self.properties.iter().find(|p| p.elset.eq_ignore_ascii_case(elset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Block {
    None,
    UserElement,
    Node,
    Element,
    Property,
}

struct Keyword {
    name: String,
    params: Vec<(String, Option<String>)>,
}

fn parse_keyword(text: &str, line: usize) -> Result<Keyword> {
    let mut parts = text[1..].split(',');
    let name = parts.next().unwrap_or("").split_whitespace().collect::<Vec<_>>().join(" ");
    if name.is_empty() {
        return Err(Error::parse(line, "empty keyword"));
    }
    let mut params = Vec::new();
    for p in parts {
        let p = p.trim();
        if p.is_empty() {
            continue;
        }
        match p.split_once('=') {
            Some((k, v)) => params.push((k.trim().to_ascii_uppercase(), Some(v.trim().to_string()))),
            None => params.push((p.to_ascii_uppercase(), None)),
        }
    }
    Ok(Keyword {
        name: name.to_ascii_uppercase(),
        params,
    })
}

impl Keyword {
    fn get(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.as_deref())
    }

    fn get_any(&self, keys: &[&str]) -> Option<&str> {
        keys.iter().find_map(|k| self.get(k))
    }

    /// `known` parameters take a value; `flags` must not.
    fn check_known(&self, known: &[&str], flags: &[&str], line: usize) -> Result<()> {
        for (k, v) in &self.params {
            if flags.contains(&k.as_str()) && v.is_none() {
                continue;
            }
            if !known.contains(&k.as_str()) {
                return Err(Error::parse(line, format!("unknown parameter '{k}' on *{}", self.name)));
            }
            if v.as_deref().is_none_or(str::is_empty) {
                return Err(Error::parse(line, format!("parameter '{k}' needs a value")));
            }
        }
        Ok(())
    }

    fn required(&self, keys: &[&str], line: usize) -> Result<&str> {
        self.get_any(keys)
            .ok_or_else(|| Error::parse(line, format!("*{} requires {}=", self.name, keys[0])))
    }

    fn required_count(&self, key: &str, line: usize) -> Result<usize> {
        let v = self.required(&[key], line)?;
        v.parse::<usize>()
            .map_err(|_| Error::parse(line, format!("{key}={v} is not a non-negative integer")))
    }
}

fn fields(data: &str) -> Vec<&str> {
    let mut f: Vec<&str> = data.split(',').map(str::trim).collect();
    if f.last() == Some(&"") {
        f.pop();
    }
    f
}

fn int_field(s: &str, line: usize, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("{what} '{s}' is not a non-negative integer")))
}

fn float_field(s: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} '{s}' is not finite")));
    }
    Ok(v)
}

/// Joins data lines ending in a comma with the following line.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with("**") {
            continue;
        }
        if let Some((l, mut acc)) = pending.take() {
            if t.starts_with('*') {
                out.push((l, acc));
            } else {
                acc.push_str(t);
                if t.ends_with(',') {
                    pending = Some((l, acc));
                } else {
                    out.push((l, acc));
                }
                continue;
            }
        }
        if !t.starts_with('*') && t.ends_with(',') {
            pending = Some((line, t.to_string()));
        } else {
            out.push((line, t.to_string()));
        }
    }
    out.extend(pending);
    out
}

/// Parses a deck. Errors carry the 1-based line number of the offending line.
pub fn parse_inp(text: &str) -> Result<DeckModel> {
    let mut deck = DeckModel::default();
    let mut block = Block::None;
    let mut current_type = String::new();
    let mut current_elset: Option<String> = None;
    let mut current_uel: Option<usize> = None;
    let mut current_prop: Option<usize> = None;

    for (line, t) in logical_lines(text) {
        if t.starts_with('*') {
            let kw = parse_keyword(&t, line)?;
            match kw.name.as_str() {
                "USER ELEMENT" => {
                    kw.check_known(
                        &["NODES", "TYPE", "PROPERTIES", "COORDINATES", "VARIABLES", "I PROPERTIES"],
                        &["UNSYMM"],
                        line,
                    )?;
                    let nodes = kw.required_count("NODES", line)?;
                    if nodes < 3 {
                        return Err(Error::parse(line, format!("NODES={nodes}: a polygon needs at least 3")));
                    }
                    let type_name = kw.required(&["TYPE"], line)?.to_string();
                    let properties = kw.get("PROPERTIES").map_or(Ok(0), |_| kw.required_count("PROPERTIES", line))?;
                    let coordinates = kw.get("COORDINATES").map_or(Ok(2), |_| kw.required_count("COORDINATES", line))?;
                    if coordinates != 2 {
                        return Err(Error::parse(line, format!("COORDINATES={coordinates}: only 2 is supported")));
                    }
                    if deck.user_element(&type_name).is_some() {
                        return Err(Error::parse(line, format!("user element type {type_name} defined twice")));
                    }
                    deck.user_elements.push(UserElementDef {
                        type_name,
                        nodes,
                        properties,
                        coordinates,
                        dofs: Vec::new(),
                        line,
                    });
                    current_uel = Some(deck.user_elements.len() - 1);
                    block = Block::UserElement;
                }
                "NODE" => {
                    kw.check_known(&["NSET"], &[], line)?;
                    block = Block::Node;
                }
                "ELEMENT" => {
                    kw.check_known(&["TYPE", "ELSET", "ELEST"], &[], line)?;
                    let ty = kw.required(&["TYPE"], line)?;
                    let def = deck
                        .user_element(ty)
                        .ok_or_else(|| Error::parse(line, format!("element type {ty} is not a declared user element")))?;
                    current_type = def.type_name.clone();
                    current_elset = kw.get_any(&["ELSET", "ELEST"]).map(str::to_string);
                    block = Block::Element;
                }
                "UEL PROPERTY" => {
                    kw.check_known(&["ELSET", "ELEST"], &[], line)?;
                    let elset = kw.required(&["ELSET", "ELEST"], line)?.to_string();
                    if deck.property(&elset).is_some() {
                        return Err(Error::parse(line, format!("properties for element set {elset} given twice")));
                    }
                    deck.properties.push(UelProperty {
                        elset,
                        values: Vec::new(),
                        line,
                    });
                    current_prop = Some(deck.properties.len() - 1);
                    block = Block::Property;
                }
                other => {
                    return Err(Error::parse(line, format!("unsupported keyword *{other}")));
                }
            }
            continue;
        }

        let f = fields(&t);
        match block {
            Block::None => return Err(Error::parse(line, "data line before any keyword")),
            Block::UserElement => {
                let u = &mut deck.user_elements[current_uel.expect("set with block")];
                for s in f {
                    let d = s
                        .parse::<u32>()
                        .map_err(|_| Error::parse(line, format!("degree of freedom '{s}' is not an integer")))?;
                    u.dofs.push(d);
                }
            }
            Block::Node => {
                if f.len() != 3 {
                    return Err(Error::parse(line, format!("node line needs id, x, y; found {} fields", f.len())));
                }
                let id = int_field(f[0], line, "node id")?;
                let x = float_field(f[1], line, "x coordinate")?;
                let y = float_field(f[2], line, "y coordinate")?;
                if deck.nodes.iter().any(|n| n.id == id) {
                    return Err(Error::parse(line, format!("duplicate node id {id}")));
                }
                deck.nodes.push(DeckNode { id, x, y, line });
            }
            Block::Element => {
                let expected = deck.user_element(&current_type).expect("declared").nodes;
                if f.len() != expected + 1 {
                    return Err(Error::parse(
                        line,
                        format!(
                            "element of type {current_type} needs an id and {expected} nodes; found {} fields",
                            f.len()
                        ),
                    ));
                }
                let id = int_field(f[0], line, "element id")?;
                let nodes = f[1..]
                    .iter()
                    .map(|s| int_field(s, line, "node id"))
                    .collect::<Result<Vec<_>>>()?;
                if deck.elements.iter().any(|e| e.id == id) {
                    return Err(Error::parse(line, format!("duplicate element id {id}")));
                }
                deck.elements.push(DeckElement {
                    id,
                    type_name: current_type.clone(),
                    elset: current_elset.clone(),
                    nodes,
                    line,
                });
            }
            Block::Property => {
                let p = &mut deck.properties[current_prop.expect("set with block")];
                for s in f {
                    p.values.push(float_field(s, line, "property")?);
                }
            }
        }
    }

    for u in &deck.user_elements {
        if u.dofs.is_empty() {
            return Err(Error::parse(u.line, format!("user element {} lists no degrees of freedom", u.type_name)));
        }
    }
    for p in &deck.properties {
        let Some(e) = deck
            .elements
            .iter()
            .find(|e| e.elset.as_deref().is_some_and(|s| s.eq_ignore_ascii_case(&p.elset)))
        else {
            return Err(Error::parse(p.line, format!("element set {} has no elements", p.elset)));
        };
        let want = deck.user_element(&e.type_name).expect("declared").properties;
        if p.values.len() != want {
            return Err(Error::parse(
                p.line,
                format!("element set {} needs {want} property values, found {}", p.elset, p.values.len()),
            ));
        }
    }
    Ok(deck)
}
