//! University-domain dataset generator.
//!
//! Entities follow the familiar LUBM naming scheme
//! (`http://www.Department{d}.University{u}.edu/GraduateStudent{i}`), with
//! every superclass type asserted explicitly since matching is purely
//! syntactic.
//!
//! Emission order is part of the output contract because twin-table
//! placement depends on it. All descriptive triples (types and literal
//! attributes) come first, then the link triples. Links whose target is a
//! container (department, course, university) come before links that
//! point back at people or departments, and the latter are interleaved
//! with the tail of the former. That way each back link lands in the
//! table opposite the forward links instead of flipping the cursor twice.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Term, Triple};
use crate::ntriples::write_triples;

pub const UB: &str = "http://www.lehigh.edu/~zhp2/2004/0401/univ-bench.owl#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

const RESEARCH_GROUPS_PER_DEPARTMENT: usize = 2;

/// Generator parameters. Defaults give roughly 100k triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Default 6.
    pub universities: usize,
    /// Default 18.
    pub departments_per_university: usize,
    /// Default 60; a quarter (at least one) are graduate students.
    pub students_per_department: usize,
    /// Default 12, assigned Full/Associate/Assistant round-robin. At least
    /// 3 are needed for every kind to exist.
    pub professors_per_department: usize,
    /// Default 20, split evenly between undergraduate and graduate courses.
    pub courses_per_department: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            universities: 6,
            departments_per_university: 18,
            students_per_department: 60,
            professors_per_department: 12,
            courses_per_department: 20,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Default shape with a different number of universities.
    pub fn with_scale(seed: u64, universities: usize) -> Self {
        Self {
            seed,
            universities,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("universities", self.universities),
            ("departments_per_university", self.departments_per_university),
            ("students_per_department", self.students_per_department),
            ("professors_per_department", self.professors_per_department),
            ("courses_per_department", self.courses_per_department),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}

const PROF_KINDS: [&str; 3] = ["FullProfessor", "AssociateProfessor", "AssistantProfessor"];

fn ub(local: &str) -> Term {
    Term::iri(format!("{UB}{local}"))
}

struct Out {
    desc: Vec<Triple>,
    /// Links into containers: memberOf, worksFor, degree, teacherOf, takesCourse.
    forward: Vec<Triple>,
    /// Links back into people or departments.
    back: Vec<Triple>,
    type_p: Term,
}

impl Out {
    fn push(list: &mut Vec<Triple>, s: &Term, p: Term, o: Term) {
        list.push(Triple::new(s.clone(), p, o).expect("generator emits valid triples"));
    }

    fn types(&mut self, s: &Term, classes: &[&str]) {
        for c in classes {
            let p = self.type_p.clone();
            Self::push(&mut self.desc, s, p, ub(c));
        }
    }

    fn attr(&mut self, s: &Term, p: &str, value: String) {
        Self::push(&mut self.desc, s, ub(p), Term::literal(value));
    }

    fn forward(&mut self, s: &Term, p: &str, o: &Term) {
        Self::push(&mut self.forward, s, ub(p), o.clone());
    }

    fn back(&mut self, s: &Term, p: &str, o: &Term) {
        Self::push(&mut self.back, s, ub(p), o.clone());
    }

    fn person(&mut self, rng: &mut ChaCha8Rng, s: &Term, local: &str, host: &str) {
        self.attr(s, "name", local.to_string());
        self.attr(s, "emailAddress", format!("{local}@{host}"));
        self.attr(
            s,
            "telephone",
            format!("{:03}-{:03}-{:04}", rng.gen_range(100..1000), rng.gen_range(0..1000), rng.gen_range(0..10000)),
        );
    }
}

struct Dept {
    iri: Term,
    host: String,
    profs: Vec<Term>,
    courses: Vec<Term>,
    grad_courses: Vec<Term>,
}

/// Generates the dataset in its canonical emission order.
pub fn generate(config: &GenConfig) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Out {
        desc: Vec::new(),
        forward: Vec::new(),
        back: Vec::new(),
        type_p: Term::iri(RDF_TYPE),
    };
    let univs: Vec<Term> = (0..config.universities)
        .map(|u| Term::iri(format!("http://www.University{u}.edu")))
        .collect();

    for (u, univ) in univs.iter().enumerate() {
        out.types(univ, &["University", "Organization"]);
        out.attr(univ, "name", format!("University{u}"));
        for d in 0..config.departments_per_university {
            let host = format!("Department{d}.University{u}.edu");
            let dept = Dept {
                iri: Term::iri(format!("http://www.{host}")),
                profs: Vec::new(),
                courses: Vec::new(),
                grad_courses: Vec::new(),
                host,
            };
            department(&mut out, &mut rng, config, &univs, u, d, dept);
        }
    }

    let Out {
        mut desc,
        forward,
        back,
        ..
    } = out;
    let lead = forward.len().saturating_sub(back.len());
    desc.extend(forward[..lead].iter().cloned());
    let mut fwd = forward[lead..].iter();
    for b in back {
        desc.push(b);
        if let Some(f) = fwd.next() {
            desc.push(f.clone());
        }
    }
    desc.extend(fwd.cloned());
    desc
}

fn department(
    out: &mut Out,
    rng: &mut ChaCha8Rng,
    config: &GenConfig,
    univs: &[Term],
    u: usize,
    d: usize,
    mut dept: Dept,
) {
    let univ = &univs[u];
    let base = format!("http://www.{}", dept.host);
    out.types(&dept.iri, &["Department", "Organization"]);
    out.attr(&dept.iri, "name", format!("Department{d}"));
    out.back(&dept.iri, "subOrganizationOf", univ);

    for g in 0..RESEARCH_GROUPS_PER_DEPARTMENT {
        let rg = Term::iri(format!("{base}/ResearchGroup{g}"));
        out.types(&rg, &["ResearchGroup", "Organization"]);
        out.forward(&rg, "subOrganizationOf", &dept.iri);
        out.forward(&rg, "subOrganizationOf", univ);
    }

    let half = config.courses_per_department.div_ceil(2);
    for (kind, n, classes) in [
        ("Course", half, &["Course"][..]),
        ("GraduateCourse", config.courses_per_department - half, &["GraduateCourse", "Course"][..]),
    ] {
        for c in 0..n {
            let local = format!("{kind}{c}");
            let course = Term::iri(format!("{base}/{local}"));
            out.types(&course, classes);
            out.attr(&course, "name", local);
            if kind == "Course" {
                dept.courses.push(course);
            } else {
                dept.grad_courses.push(course);
            }
        }
    }

    let mut per_kind = [0usize; 3];
    for i in 0..config.professors_per_department {
        let k = i % 3;
        let local = format!("{}{}", PROF_KINDS[k], per_kind[k]);
        per_kind[k] += 1;
        let prof = Term::iri(format!("{base}/{local}"));
        out.types(&prof, &[PROF_KINDS[k], "Professor", "Faculty", "Person"]);
        if i == 0 {
            out.types(&prof, &["Chair"]);
        }
        out.person(rng, &prof, &local, &dept.host);
        out.forward(&prof, "worksFor", &dept.iri);
        let alma = &univs[rng.gen_range(0..univs.len())];
        out.forward(&prof, "undergraduateDegreeFrom", alma);
        out.back(alma, "hasAlumnus", &prof);
        for p in 0..rng.gen_range(1..=4) {
            let publ = Term::iri(format!("{base}/{local}/Publication{p}"));
            out.types(&publ, &["Publication"]);
            out.attr(&publ, "name", format!("Publication{p}"));
            out.back(&publ, "publicationAuthor", &prof);
        }
        dept.profs.push(prof);
    }

    // course j is taught by professor j mod P
    let profs = dept.profs.clone();
    for list in [&dept.courses, &dept.grad_courses] {
        for (j, course) in list.iter().enumerate() {
            out.forward(&profs[j % profs.len()], "teacherOf", course);
        }
    }

    let grads = (config.students_per_department / 4).max(1);
    for i in 0..config.students_per_department {
        let grad = i < grads;
        let local = if grad {
            format!("GraduateStudent{i}")
        } else {
            format!("UndergraduateStudent{}", i - grads)
        };
        let student = Term::iri(format!("{base}/{local}"));
        let kind = if grad { "GraduateStudent" } else { "UndergraduateStudent" };
        out.types(&student, &[kind, "Student", "Person"]);
        out.person(rng, &student, &local, &dept.host);
        out.forward(&student, "memberOf", &dept.iri);

        let pool = if grad && !dept.grad_courses.is_empty() {
            &dept.grad_courses
        } else {
            &dept.courses
        };
        let mut taken: Vec<usize> = Vec::new();
        let mut advisor = None;
        if i == 0 {
            // Taught by its own advisor, and it is course 0 of the pool.
            taken.push(0);
            advisor = Some(0);
        } else if i == grads && pool.len() > 1 {
            taken.push(1);
        }
        let want = if grad { rng.gen_range(1..=3) } else { rng.gen_range(2..=4) };
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(rng);
        for c in order {
            if taken.len() >= want.min(pool.len()) {
                break;
            }
            if !taken.contains(&c) {
                taken.push(c);
            }
        }
        for c in taken {
            out.forward(&student, "takesCourse", &pool[c]);
        }

        if grad {
            // first graduate student stays at its own university
            let alma = if i == 0 { u } else { rng.gen_range(0..univs.len()) };
            out.forward(&student, "undergraduateDegreeFrom", &univs[alma]);
            out.back(&univs[alma], "hasAlumnus", &student);
            if advisor.is_none() {
                advisor = Some(rng.gen_range(0..profs.len()));
            }
        } else if rng.gen_ratio(1, 5) {
            advisor = Some(rng.gen_range(0..profs.len()));
        }
        if let Some(a) = advisor {
            out.back(&student, "advisor", &profs[a]);
        }
    }
}

/// Writes the dataset as N-Triples.
pub fn write_dataset(config: &GenConfig, path: &Path) -> std::io::Result<usize> {
    let triples = generate(config);
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_triples(&mut w, &triples)?;
    w.flush()?;
    Ok(triples.len())
}
