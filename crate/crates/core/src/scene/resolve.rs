use std::collections::BTreeMap;
use std::sync::Arc;

use crate::group::{generate_group, GroupError, GroupHom, GroupTable, Subgroup, DEFAULT_MAX_ORDER};
use crate::linalg::{AffineSubspace, RatMatrix, Rational};
use crate::maps::EquivariantAffineMap;
use crate::metric::{MetricProbe, DEFAULT_DEPTH, DEFAULT_TOLERANCE};
use crate::suborbifold::{ChartModel, SuborbifoldCandidate};

use super::format::*;
use super::{ModuleError, SceneError};

#[derive(Clone, Debug, Default)]
pub struct SceneOptions {
    /// Overrides every group's `max_order`.
    pub max_order: Option<usize>,
}

/// A group entry after enumeration, remembering its generators in
/// canonical element indices.
#[derive(Clone, Debug)]
pub struct SceneGroup {
    pub chart: ChartModel,
    pub generators: Vec<usize>,
}

/// A probe with its depth and tolerance still overridable.
#[derive(Clone, Debug)]
pub struct ProbeSpec {
    pub chart: ChartModel,
    pub subgroup: Subgroup,
    pub subspace: AffineSubspace,
    pub pairs: Vec<(Vec<Rational>, Vec<Rational>)>,
    pub depth: Option<u32>,
    pub tolerance: Option<f64>,
}

impl ProbeSpec {
    pub fn build(&self, depth: Option<u32>, tolerance: Option<f64>) -> Result<MetricProbe, ModuleError> {
        Ok(MetricProbe::new(
            self.chart.clone(),
            self.subgroup.clone(),
            self.subspace.clone(),
            self.pairs.clone(),
            depth.or(self.depth).unwrap_or(DEFAULT_DEPTH),
            tolerance.or(self.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        )?)
    }
}

/// A scene with every name resolved and every object validated.
#[derive(Clone, Debug)]
pub struct Scene {
    pub groups: BTreeMap<String, SceneGroup>,
    pub subgroups: BTreeMap<String, (String, Subgroup)>,
    pub subspaces: BTreeMap<String, AffineSubspace>,
    pub candidates: BTreeMap<String, SuborbifoldCandidate>,
    pub maps: BTreeMap<String, EquivariantAffineMap>,
    pub probes: BTreeMap<String, ProbeSpec>,
    pub queries: Vec<RawQuery>,
}

fn lookup<'a, T>(table: &'a BTreeMap<String, T>, kind: &'static str, name: &str, location: &str) -> Result<&'a T, SceneError> {
    table.get(name).ok_or_else(|| SceneError::UnresolvedName {
        kind,
        name: name.to_string(),
        location: location.to_string(),
    })
}

fn vector(raw: &RawVector) -> Vec<Rational> {
    raw.iter().map(|s| s.0.clone()).collect()
}

fn sized_vector(raw: &RawVector, dim: usize, location: &str) -> Result<Vec<Rational>, SceneError> {
    if raw.len() != dim {
        return Err(SceneError::DimensionMismatch {
            location: location.to_string(),
            expected: dim,
            found: raw.len(),
        });
    }
    Ok(vector(raw))
}

fn matrix(raw: &RawMatrix, rows: usize, cols: usize, location: &str) -> Result<RatMatrix, SceneError> {
    if raw.len() != rows {
        return Err(SceneError::DimensionMismatch {
            location: location.to_string(),
            expected: rows,
            found: raw.len(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in raw.iter().enumerate() {
        data.extend(sized_vector(row, cols, &format!("{location}[{i}]"))?);
    }
    Ok(RatMatrix::from_data(rows, cols, data).expect("shape checked"))
}

fn module<T>(location: &str, result: Result<T, impl Into<ModuleError>>) -> Result<T, SceneError> {
    result.map_err(|e| SceneError::Module {
        location: location.to_string(),
        source: e.into(),
    })
}

impl Scene {
    pub fn resolve(raw: RawScene, options: &SceneOptions) -> Result<Scene, SceneError> {
        let mut groups = BTreeMap::new();
        for (name, g) in &raw.groups {
            let loc = format!("groups.{name}");
            groups.insert(name.clone(), resolve_group(g, raw.ambient_dim, options, &loc)?);
        }

        let mut subgroups = BTreeMap::new();
        for (name, s) in &raw.subgroups {
            let loc = format!("subgroups.{name}");
            let parent = lookup(&groups, "group", &s.group, &loc)?;
            subgroups.insert(name.clone(), (s.group.clone(), resolve_subgroup(s, parent, &loc)?));
        }

        let mut subspaces = BTreeMap::new();
        for (name, s) in &raw.subspaces {
            let loc = format!("subspaces.{name}");
            let n = s.base_point.len();
            let dirs = s
                .basis
                .iter()
                .enumerate()
                .map(|(i, d)| sized_vector(d, n, &format!("{loc}.basis[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(ambient) = raw.ambient_dim {
                if ambient != n {
                    return Err(SceneError::DimensionMismatch {
                        location: format!("{loc}.base_point"),
                        expected: ambient,
                        found: n,
                    });
                }
            }
            subspaces.insert(name.clone(), module(&loc, AffineSubspace::new(vector(&s.base_point), &dirs))?);
        }

        let mut candidates = BTreeMap::new();
        for (name, c) in &raw.candidates {
            let loc = format!("candidates.{name}");
            let group = lookup(&groups, "group", &c.group, &loc)?;
            let cand = resolve_candidate(c, &c.group, group, &subgroups, &subspaces, &loc)?;
            candidates.insert(name.clone(), cand);
        }

        let mut maps = BTreeMap::new();
        for (name, m) in &raw.maps {
            let loc = format!("maps.{name}");
            let domain = lookup(&groups, "group", &m.domain, &loc)?;
            let codomain = lookup(&groups, "group", &m.codomain, &loc)?;
            maps.insert(name.clone(), resolve_map(m, domain, codomain, &loc)?);
        }

        let mut probes = BTreeMap::new();
        for (name, p) in &raw.probes {
            let loc = format!("probes.{name}");
            let group = lookup(&groups, "group", &p.group, &loc)?;
            let subgroup = match &p.subgroup {
                None => group.chart.group().whole(),
                Some(s) => owned_subgroup(&subgroups, s, &p.group, &loc)?,
            };
            let subspace = lookup(&subspaces, "subspace", &p.subspace, &loc)?.clone();
            let n = group.chart.ambient_dim();
            check_dim(subspace.ambient_dim(), n, &format!("{loc}.subspace"))?;
            let pairs = p
                .pairs
                .iter()
                .enumerate()
                .map(|(i, [x, y])| {
                    let at = format!("{loc}.pairs[{i}]");
                    Ok((sized_vector(x, n, &at)?, sized_vector(y, n, &at)?))
                })
                .collect::<Result<Vec<_>, SceneError>>()?;
            let spec = ProbeSpec {
                chart: group.chart.clone(),
                subgroup,
                subspace,
                pairs,
                depth: p.depth,
                tolerance: p.tolerance,
            };
            module(&loc, spec.build(None, None))?;
            probes.insert(name.clone(), spec);
        }

        for (i, q) in raw.queries.iter().enumerate() {
            check_query(q, i, &candidates, &maps, &probes)?;
        }

        Ok(Scene {
            groups,
            subgroups,
            subspaces,
            candidates,
            maps,
            probes,
            queries: raw.queries,
        })
    }
}

fn check_dim(found: usize, expected: usize, location: &str) -> Result<(), SceneError> {
    if found != expected {
        return Err(SceneError::DimensionMismatch {
            location: location.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

fn resolve_group(g: &RawGroup, ambient: Option<usize>, options: &SceneOptions, loc: &str) -> Result<SceneGroup, SceneError> {
    let first_dim = g
        .generators
        .first()
        .map(|m| m.len())
        .or_else(|| g.complex_generators.first().map(|c| 2 * c.re.len()));
    let dim = g.dim.or(ambient).or(first_dim).ok_or_else(|| SceneError::InvalidValue {
        location: loc.to_string(),
        message: "cannot infer the dimension of a group without generators; set `dim`".into(),
    })?;
    if let (Some(a), Some(d)) = (ambient, g.dim) {
        check_dim(d, a, &format!("{loc}.dim"))?;
    }
    let mut mats = Vec::new();
    for (i, raw) in g.generators.iter().enumerate() {
        mats.push(matrix(raw, dim, dim, &format!("{loc}.generators[{i}]"))?);
    }
    for (i, c) in g.complex_generators.iter().enumerate() {
        let at = format!("{loc}.complex_generators[{i}]");
        if dim % 2 != 0 {
            return Err(SceneError::DimensionMismatch {
                location: at,
                expected: dim + 1,
                found: dim,
            });
        }
        let re = matrix(&c.re, dim / 2, dim / 2, &format!("{at}.re"))?;
        let im = matrix(&c.im, dim / 2, dim / 2, &format!("{at}.im"))?;
        mats.push(module(&at, RatMatrix::realify(&re, &im))?);
    }
    let max_order = options.max_order.or(g.max_order).unwrap_or(DEFAULT_MAX_ORDER);
    let group = module(loc, generate_group(dim, &mats, max_order))?;
    let generators = mats
        .iter()
        .map(|m| group.index_of(m).expect("generators belong to the generated group"))
        .collect();
    Ok(SceneGroup {
        chart: ChartModel::from_shared(Arc::new(group)),
        generators,
    })
}

fn element_indices(group: &SceneGroup, mats: &[RawMatrix], loc: &str) -> Result<Vec<usize>, SceneError> {
    let g = group.chart.group();
    let n = g.dim();
    mats.iter()
        .enumerate()
        .map(|(i, raw)| {
            let at = format!("{loc}[{i}]");
            let m = matrix(raw, n, n, &at)?;
            g.index_of(&m).ok_or(SceneError::InvalidValue {
                location: at,
                message: "matrix is not an element of the group".into(),
            })
        })
        .collect()
}

fn resolve_subgroup(s: &RawSubgroup, parent: &SceneGroup, loc: &str) -> Result<Subgroup, SceneError> {
    let g = parent.chart.group();
    let forms = [
        s.generators.is_some(),
        s.generator_indices.is_some(),
        s.elements.is_some(),
        s.stabilizer_of.is_some(),
        s.whole,
    ];
    if forms.iter().filter(|&&b| b).count() != 1 {
        return Err(SceneError::InvalidValue {
            location: loc.to_string(),
            message: "give exactly one of `generators`, `generator_indices`, `elements`, `stabilizer_of`, `whole`".into(),
        });
    }
    if s.whole {
        return Ok(g.whole());
    }
    if let Some(x) = &s.stabilizer_of {
        let x = sized_vector(x, g.dim(), &format!("{loc}.stabilizer_of"))?;
        return Ok(g.stabilizer(&g.whole(), &x));
    }
    if let Some(elements) = &s.elements {
        if let Some(&bad) = elements.iter().find(|&&i| i >= g.order()) {
            return module(loc, Err(GroupError::IndexOutOfRange(bad)));
        }
        let sub = Subgroup::from_indices(elements.clone());
        if !g.is_subgroup(&sub) {
            return module(loc, Err(GroupError::NotSubgroup));
        }
        return Ok(sub);
    }
    let gens = match (&s.generators, &s.generator_indices) {
        (Some(mats), _) => element_indices(parent, mats, &format!("{loc}.generators"))?,
        (_, Some(idx)) => idx
            .iter()
            .map(|&i| {
                parent.generators.get(i).copied().ok_or(SceneError::InvalidValue {
                    location: format!("{loc}.generator_indices"),
                    message: format!("group has no generator {i}"),
                })
            })
            .collect::<Result<_, _>>()?,
        _ => unreachable!("one form is present"),
    };
    module(loc, g.generate_subgroup(&gens))
}

fn owned_subgroup(
    subgroups: &BTreeMap<String, (String, Subgroup)>,
    name: &str,
    group_name: &str,
    loc: &str,
) -> Result<Subgroup, SceneError> {
    let (parent, sub) = lookup(subgroups, "subgroup", name, loc)?;
    if parent != group_name {
        return Err(SceneError::InvalidValue {
            location: loc.to_string(),
            message: format!("subgroup `{name}` belongs to `{parent}`, not `{group_name}`"),
        });
    }
    Ok(sub.clone())
}

fn resolve_candidate(
    c: &RawCandidate,
    group_name: &str,
    group: &SceneGroup,
    subgroups: &BTreeMap<String, (String, Subgroup)>,
    subspaces: &BTreeMap<String, AffineSubspace>,
    loc: &str,
) -> Result<SuborbifoldCandidate, SceneError> {
    let chart = group.chart.clone();
    let n = chart.ambient_dim();
    if let Some(p) = &c.point {
        if c.subgroup.is_some() || c.subspace.is_some() {
            return Err(SceneError::InvalidValue {
                location: loc.to_string(),
                message: "a point candidate takes neither `subgroup` nor `subspace`".into(),
            });
        }
        let x = sized_vector(p, n, &format!("{loc}.point"))?;
        return module(loc, SuborbifoldCandidate::point(chart, x));
    }
    let Some(sname) = &c.subspace else {
        return Err(SceneError::InvalidValue {
            location: loc.to_string(),
            message: "missing `subspace` (or `point`)".into(),
        });
    };
    let v = lookup(subspaces, "subspace", sname, loc)?.clone();
    check_dim(v.ambient_dim(), n, &format!("{loc}.subspace"))?;
    let delta = match &c.subgroup {
        None => chart.group().whole(),
        Some(s) => owned_subgroup(subgroups, s, group_name, loc)?,
    };
    module(loc, SuborbifoldCandidate::new(chart, delta, v))
}

fn resolve_map(m: &RawMap, domain: &SceneGroup, codomain: &SceneGroup, loc: &str) -> Result<EquivariantAffineMap, SceneError> {
    let (n1, n2) = (domain.chart.ambient_dim(), codomain.chart.ambient_dim());
    let linear = matrix(&m.matrix, n2, n1, &format!("{loc}.matrix"))?;
    let offset = match &m.offset {
        Some(o) => sized_vector(o, n2, &format!("{loc}.offset"))?,
        None => vec![Rational::default(); n2],
    };
    let (d, c) = (domain.chart.clone(), codomain.chart.clone());
    let result = match &m.theta {
        RawTheta::Named(name) if name == "trivial" => EquivariantAffineMap::with_trivial_theta(d, c, linear, offset),
        RawTheta::Named(name) if name == "identity" => {
            if d != c {
                return Err(SceneError::InvalidValue {
                    location: format!("{loc}.theta"),
                    message: "`identity` needs the same group on both sides".into(),
                });
            }
            let theta = GroupHom {
                image_of: (0..d.group().order()).collect(),
            };
            EquivariantAffineMap::new(d, c, linear, offset, theta)
        }
        RawTheta::Named(other) => {
            return Err(SceneError::InvalidValue {
                location: format!("{loc}.theta"),
                message: format!("unknown theta `{other}`; expected `trivial`, `identity`, pairs or images"),
            })
        }
        RawTheta::Pairs(pairs) => {
            let mut image_of = vec![usize::MAX; d.group().order()];
            for &[a, b] in pairs {
                if a >= image_of.len() || b >= c.group().order() {
                    return Err(SceneError::InvalidValue {
                        location: format!("{loc}.theta"),
                        message: format!("pair [{a}, {b}] is out of range"),
                    });
                }
                image_of[a] = b;
            }
            if image_of.contains(&usize::MAX) {
                return Err(SceneError::InvalidValue {
                    location: format!("{loc}.theta"),
                    message: "pairs must cover every domain element".into(),
                });
            }
            EquivariantAffineMap::new(d, c, linear, offset, GroupHom { image_of })
        }
        RawTheta::Images { images } => {
            if images.len() != domain.generators.len() {
                return Err(SceneError::DimensionMismatch {
                    location: format!("{loc}.theta.images"),
                    expected: domain.generators.len(),
                    found: images.len(),
                });
            }
            let targets = element_indices(codomain, images, &format!("{loc}.theta.images"))?;
            let gens: Vec<(usize, usize)> = domain.generators.iter().copied().zip(targets).collect();
            EquivariantAffineMap::from_generator_images(d, c, linear, offset, &gens)
        }
    };
    module(loc, result)
}

fn check_query(
    q: &RawQuery,
    index: usize,
    candidates: &BTreeMap<String, SuborbifoldCandidate>,
    maps: &BTreeMap<String, EquivariantAffineMap>,
    probes: &BTreeMap<String, ProbeSpec>,
) -> Result<(), SceneError> {
    let loc = format!("queries[{index}]");
    let cand = |name: &str| lookup(candidates, "candidate", name, &loc).map(|c| c.chart().ambient_dim());
    match q {
        RawQuery::Classify { candidate, points, .. } => {
            let n = cand(candidate)?;
            for (i, p) in points.iter().enumerate() {
                check_dim(p.len(), n, &format!("{loc}.points[{i}]"))?;
            }
        }
        RawQuery::Isotropy { candidate, point, .. } => {
            let n = cand(candidate)?;
            check_dim(point.len(), n, &format!("{loc}.point"))?;
        }
        RawQuery::Embedding { candidate, .. } => {
            cand(candidate)?;
        }
        RawQuery::Intersect { first, second, .. } => {
            let n = cand(first)?;
            check_dim(cand(second)?, n, &format!("{loc}.second"))?;
        }
        RawQuery::Preimage { map, candidate, .. } => {
            let f = lookup(maps, "map", map, &loc)?;
            check_dim(cand(candidate)?, f.codomain().ambient_dim(), &format!("{loc}.candidate"))?;
        }
        RawQuery::Image { map, candidate, .. } => {
            let f = lookup(maps, "map", map, &loc)?;
            check_dim(cand(candidate)?, f.domain().ambient_dim(), &format!("{loc}.candidate"))?;
        }
        RawQuery::Graph { map, .. } => {
            lookup(maps, "map", map, &loc)?;
        }
        RawQuery::FiberedProduct { first, second, .. } => {
            let f1 = lookup(maps, "map", first, &loc)?;
            let f2 = lookup(maps, "map", second, &loc)?;
            check_dim(f2.codomain().ambient_dim(), f1.codomain().ambient_dim(), &format!("{loc}.second"))?;
        }
        RawQuery::RegularValue { map, value, .. } => {
            let f = lookup(maps, "map", map, &loc)?;
            check_dim(value.len(), f.codomain().ambient_dim(), &format!("{loc}.value"))?;
        }
        RawQuery::MetricCheck { probe, .. } => {
            lookup(probes, "probe", probe, &loc)?;
        }
    }
    Ok(())
}
