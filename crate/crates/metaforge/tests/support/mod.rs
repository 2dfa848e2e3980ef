//! Fixtures, mock wiring and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Barrier};

use metaforge::mock::{self, MockServer, SubmissionMock, Taxonomy, TerminologyMock, ValidatorMock};
use metaforge::repository::{
    root_folder, AclEntry, Content, NewResource, Permission, Principal, Repository, ResourceType, Snapshot,
};
use metaforge::service::Service;
use metaforge::submission::{SubmissionTarget, TargetFormat};
use metaforge::terminology::{RemoteConfig, Terminology, ValueSetMember};
use metaforge::{Code, Error};
use metaforge_core::model::{ConstraintSource, LiteralEntry, ValueConstraintSet};
use metaforge_core::ResourceId;
use serde_json::{json, Value};

pub const FIVE_TYPES: &str = "7d2f1c3a-8e4b-4f6a-b1d2-3c4e5f6a7b8c";
pub const THREE_FIELDS: &str = "5a1e9c7b-3f2d-4e8a-9b6c-1d0e2f3a4b5c";
pub const TISSUE_SAMPLE: &str = "0b6f4e8a-2d1c-4c3e-9a57-5d2e8f1a7c10";

pub const OBO: &str = "http://purl.obolibrary.org/obo/";

pub fn obo(local: &str) -> String {
    format!("{OBO}{local}")
}

pub fn id(s: &str) -> ResourceId {
    ResourceId::parse(s).unwrap()
}

pub fn fixture_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel)).unwrap()
}

pub fn corpus_files() -> Vec<PathBuf> {
    (1..=5)
        .map(|i| fixture_path(&format!("corpus/instance-{i}.json")))
        .collect()
}

pub fn expect_code<T: std::fmt::Debug>(r: Result<T, Error>, code: Code) -> Error {
    match r {
        Err(e) if e.code == code => e,
        other => panic!("expected {code}, got {other:?}"),
    }
}

// ----- service with mocks -----

pub const API_KEY_VAR: &str = "METAFORGE_TEST_SUBMIT_KEY";
pub const API_KEY: &str = "s3cret";

/// An address nothing listens on.
pub fn closed_port() -> std::net::SocketAddr {
    let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    l.local_addr().unwrap()
}

/// A service wired to the bundled terminology, validator and submission mocks.
pub struct Env {
    pub service: Arc<Service>,
    pub terminology: Arc<TerminologyMock>,
    pub validator: Arc<ValidatorMock>,
    pub submission: Arc<SubmissionMock>,
    pub servers: Vec<MockServer>,
    pub terminology_url: String,
}

impl Env {
    pub fn new() -> Env {
        Env::build(Arc::new(Repository::in_memory()))
    }

    pub fn on_disk(dir: &Path) -> Env {
        Env::build(Arc::new(Repository::open(dir).unwrap()))
    }

    pub fn build(repo: Arc<Repository>) -> Env {
        let terminology = TerminologyMock::new(Taxonomy::fixture());
        let validator = ValidatorMock::accepting();
        let submission = SubmissionMock::new();
        let t_server = mock::spawn_terminology(terminology.clone()).unwrap();
        let v_server = mock::spawn_validator(validator.clone()).unwrap();
        let s_server = mock::spawn_submission(submission.clone()).unwrap();
        let targets = vec![
            SubmissionTarget {
                name: "mock".into(),
                endpoint_url: format!("{}/", s_server.url()),
                format: TargetFormat::Json,
                api_key_env_var: API_KEY_VAR.into(),
                external_validator_url: None,
            },
            SubmissionTarget {
                name: "checked".into(),
                endpoint_url: format!("{}/", s_server.url()),
                format: TargetFormat::Json,
                api_key_env_var: API_KEY_VAR.into(),
                external_validator_url: Some(format!("{}/", v_server.url())),
            },
            SubmissionTarget {
                name: "tsv".into(),
                endpoint_url: format!("{}/", s_server.url()),
                format: TargetFormat::Tsv,
                api_key_env_var: API_KEY_VAR.into(),
                external_validator_url: None,
            },
            SubmissionTarget {
                name: "keyless".into(),
                endpoint_url: format!("{}/", s_server.url()),
                format: TargetFormat::Json,
                api_key_env_var: "METAFORGE_TEST_UNSET_KEY".into(),
                external_validator_url: None,
            },
            SubmissionTarget {
                name: "unreachable".into(),
                endpoint_url: format!("http://{}/", closed_port()),
                format: TargetFormat::Json,
                api_key_env_var: API_KEY_VAR.into(),
                external_validator_url: None,
            },
        ];
        let terminology_url = t_server.url();
        let term = Arc::new(Terminology::new(
            repo.clone(),
            Some(RemoteConfig {
                base_url: terminology_url.clone(),
                api_key: None,
            }),
        ));
        let service =
            Service::new(repo, term, targets).with_credentials(|var| (var == API_KEY_VAR).then(|| API_KEY.to_owned()));
        Env {
            service: Arc::new(service),
            terminology,
            validator,
            submission,
            servers: vec![t_server, v_server, s_server],
            terminology_url,
        }
    }

    pub fn user(&self, name: &str) -> (ResourceId, String) {
        let (u, token) = self.service.repo.create_user(name).unwrap();
        (u.id, token)
    }

    pub fn template(&self, rel: &str, actor: &ResourceId) -> ResourceId {
        self.service
            .create_template(
                metaforge_core::model::TemplateKind::Template,
                &fixture(rel),
                None,
                actor,
            )
            .unwrap()
            .id
    }
}

/// The REST API over a service, on an ephemeral port.
pub struct Api {
    pub server: MockServer,
    pub client: reqwest::blocking::Client,
}

impl Api {
    pub fn serve(service: Arc<Service>) -> Api {
        Api {
            server: MockServer::spawn(metaforge::api::router(service)).unwrap(),
            client: reqwest::blocking::Client::new(),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}{path}", self.server.url(), metaforge::api::PREFIX)
    }

    pub fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<&str>) -> Reply {
        let method = reqwest::Method::from_bytes(method.as_bytes()).unwrap();
        let mut req = self.client.request(method, self.url(path));
        if let Some(t) = token {
            req = req.header("Authorization", format!("apikey token={t}"));
        }
        if let Some(b) = body {
            req = req.header("Content-Type", "application/json").body(b.to_owned());
        }
        Reply::from(req.send().unwrap())
    }

    pub fn get(&self, path: &str, token: &str) -> Reply {
        self.call("GET", path, Some(token), None)
    }

    pub fn post(&self, path: &str, token: &str, body: &str) -> Reply {
        self.call("POST", path, Some(token), Some(body))
    }
}

pub struct Reply {
    pub status: u16,
    pub content_type: String,
    pub body: String,
}

impl From<reqwest::blocking::Response> for Reply {
    fn from(r: reqwest::blocking::Response) -> Reply {
        let status = r.status().as_u16();
        let content_type = r
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_owned();
        Reply {
            status,
            content_type,
            body: r.text().unwrap(),
        }
    }
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    pub fn error(&self) -> String {
        self.json()["error"].as_str().unwrap_or_default().to_owned()
    }
}

// ----- CLI -----

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metaforge"))
        .args(args)
        .env_remove("METAFORGE_TERMINOLOGY_URL")
        .env_remove("METAFORGE_DATA_DIR")
        .output()
        .unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

// ----- permission fixture -----

pub const USERS: [&str; 3] = ["alice", "bob", "carol"];
pub const RESOURCES: [&str; 4] = ["project", "template", "shared", "instance"];

/// Hand-written effective permissions: rows are users, columns resources.
///
/// project:  folder in alice's home, group lab (alice, bob) may read.
/// template: in project, carol may write directly, bob reads through project.
/// shared:   folder in bob's home, everyone reads, group curators (carol) writes.
/// instance: created by carol in shared; bob writes through his owner entry on shared.
pub const EXPECTED: [[Permission; 4]; 3] = {
    use Permission::{None as N, Read as R, Write as W};
    [[W, W, R, R], [R, R, W, W], [N, W, W, W]]
};

pub struct AclFixture {
    pub users: Vec<ResourceId>,
    pub homes: Vec<ResourceId>,
    pub groups: Vec<ResourceId>,
    pub resources: Vec<ResourceId>,
}

fn resource(
    repo: &Repository,
    ty: ResourceType,
    name: &str,
    parent: &ResourceId,
    extra_acl: Vec<AclEntry>,
    actor: &ResourceId,
) -> ResourceId {
    repo.create(
        NewResource {
            id: metaforge::repository::new_id(),
            resource_type: ty,
            parent_folder: parent.clone(),
            content: Content {
                name: name.into(),
                payload: "{}".into(),
                ..Content::default()
            },
            extra_acl,
        },
        actor,
    )
    .unwrap()
    .id
}

pub fn grant(principal: Principal, level: Permission) -> AclEntry {
    AclEntry { principal, level }
}

pub fn acl_fixture(repo: &Repository) -> AclFixture {
    let created: Vec<_> = USERS.iter().map(|n| repo.create_user(n).unwrap().0).collect();
    let users: Vec<ResourceId> = created.iter().map(|u| u.id.clone()).collect();
    let homes: Vec<ResourceId> = created.iter().map(|u| u.home_folder.clone()).collect();
    let (alice, bob, carol) = (&users[0], &users[1], &users[2]);

    let lab = repo.create_group("lab", alice).unwrap().id;
    repo.change_members(&lab, std::slice::from_ref(bob), &[], alice)
        .unwrap();
    let curators = repo.create_group("curators", carol).unwrap().id;

    let project = resource(
        repo,
        ResourceType::Folder,
        "Project",
        &homes[0],
        vec![grant(Principal::Group(lab.clone()), Permission::Read)],
        alice,
    );
    let template = resource(
        repo,
        ResourceType::Template,
        "Template",
        &project,
        vec![grant(Principal::User(carol.clone()), Permission::Write)],
        alice,
    );
    let shared = resource(
        repo,
        ResourceType::Folder,
        "Shared",
        &homes[1],
        vec![
            grant(Principal::Everyone, Permission::Read),
            grant(Principal::Group(curators.clone()), Permission::Write),
        ],
        bob,
    );
    let instance = resource(repo, ResourceType::Instance, "Instance", &shared, Vec::new(), carol);
    AclFixture {
        users,
        homes,
        groups: vec![lab, curators],
        resources: vec![project, template, shared, instance],
    }
}

/// Effective permission as graph reachability over a snapshot.
///
/// Nodes are the actor, groups, the everyone principal and resources. The
/// actor reaches each group it belongs to and the everyone principal; a
/// principal reaches a resource through an ACL entry, tagged with its level;
/// a tagged grant on a folder reaches everything below it, except grants on
/// the root, which only cover the root. Owners hold write.
pub fn reachable_permission(s: &Snapshot, actor: &ResourceId, target: &ResourceId) -> Permission {
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Node {
        Actor,
        Group(ResourceId),
        Everyone,
        Resource(ResourceId, Permission),
    }
    let root = root_folder();
    let mut children: BTreeMap<&ResourceId, Vec<&ResourceId>> = BTreeMap::new();
    for r in s.records.values() {
        if r.id != r.parent_folder {
            children.entry(&r.parent_folder).or_default().push(&r.id);
        }
    }
    let edges = |n: &Node| -> Vec<Node> {
        let principal_targets = |p: &Principal| -> Vec<Node> {
            s.records
                .values()
                .flat_map(|r| {
                    r.acl
                        .iter()
                        .filter(|e| e.principal == *p)
                        .map(|e| Node::Resource(r.id.clone(), e.level))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        match n {
            Node::Actor => {
                let mut out: Vec<Node> = s
                    .groups
                    .values()
                    .filter(|g| g.members.contains(actor))
                    .map(|g| Node::Group(g.id.clone()))
                    .collect();
                out.push(Node::Everyone);
                out.extend(principal_targets(&Principal::User(actor.clone())));
                out
            }
            Node::Group(g) => principal_targets(&Principal::Group(g.clone())),
            Node::Everyone => principal_targets(&Principal::Everyone),
            Node::Resource(id, level) if *id != root => children
                .get(id)
                .map(|c| c.iter().map(|c| Node::Resource((*c).clone(), *level)).collect())
                .unwrap_or_default(),
            Node::Resource(..) => Vec::new(),
        }
    };
    let mut seen = BTreeSet::from([Node::Actor]);
    let mut queue = VecDeque::from([Node::Actor]);
    let mut best = Permission::None;
    while let Some(n) = queue.pop_front() {
        if let Node::Resource(id, level) = &n {
            if id == target {
                best = best.max(*level);
            }
        }
        for next in edges(&n) {
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    if s.records.get(target).is_some_and(|r| r.owner == *actor) {
        return Permission::Write;
    }
    best
}

/// Two writers race on one version; returns (successes, conflicts).
pub fn stale_write_trial(repo: &Arc<Repository>, id: &ResourceId, actor: &ResourceId) -> (usize, usize) {
    let version = repo.get(id, actor).unwrap().version;
    let barrier = Arc::new(Barrier::new(2));
    let handles: Vec<_> = (0..2)
        .map(|i| {
            let repo = repo.clone();
            let barrier = barrier.clone();
            let id = id.clone();
            let actor = actor.clone();
            std::thread::spawn(move || {
                let content = Content {
                    name: format!("writer {i}"),
                    payload: "{}".into(),
                    ..Content::default()
                };
                barrier.wait();
                repo.update(&id, version, content, &actor)
            })
        })
        .collect();
    let mut ok = 0;
    let mut conflicts = 0;
    for h in handles {
        match h.join().unwrap() {
            Ok(_) => ok += 1,
            Err(e) if e.code == Code::VersionConflict => conflicts += 1,
            Err(e) => panic!("unexpected {e}"),
        }
    }
    (ok, conflicts)
}

// ----- three-field enumeration -----

/// Four variants per field: absent, valid and two distinct failures.
pub fn three_field_variants() -> [Vec<(Option<Value>, Option<&'static str>)>; 3] {
    let liver = json!({"@id": obo("UBERON_0002107"), "rdfs:label": "liver"});
    [
        vec![
            (None, Some("MISSING_REQUIRED")),
            (Some(json!({"@value": 5})), None),
            (Some(json!({"@value": 11})), Some("OUT_OF_RANGE")),
            (Some(json!({"@value": 2.5})), Some("OUT_OF_RANGE")),
        ],
        vec![
            (None, None),
            (Some(json!({"@value": "AB"})), None),
            (Some(json!({"@value": "abc"})), Some("PATTERN_MISMATCH")),
            (Some(json!({"@value": 7})), Some("TYPE_MISMATCH")),
        ],
        vec![
            (None, Some("MISSING_REQUIRED")),
            (Some(liver), None),
            (
                Some(json!({"@id": "http://example.org/other", "rdfs:label": "other"})),
                Some("TERM_NOT_IN_CONSTRAINT"),
            ),
            (Some(json!({"@value": 42})), Some("TYPE_MISMATCH")),
        ],
    ]
}

pub struct Case {
    pub document: Value,
    /// (pointer, code) pairs the brute-force checker expects, sorted.
    pub expected: Vec<(String, String)>,
}

/// All 64 combinations with the errors decided field by field.
pub fn three_field_cases() -> Vec<Case> {
    let names = ["count", "code", "site"];
    let variants = three_field_variants();
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut doc = serde_json::Map::new();
                doc.insert("@context".into(), json!({"rdfs": "http://www.w3.org/2000/01/rdf-schema#", "xsd": "http://www.w3.org/2001/XMLSchema#"}));
                doc.insert("@id".into(), json!(format!("urn:example:case:{a}{b}{c}")));
                doc.insert("@type".into(), json!(format!("urn:metaforge:template:{THREE_FIELDS}")));
                let mut expected = Vec::new();
                for (f, pick) in [a, b, c].into_iter().enumerate() {
                    let (value, error) = &variants[f][pick];
                    if let Some(v) = value {
                        doc.insert(names[f].into(), v.clone());
                    }
                    if let Some(code) = error {
                        // an absent field is reported on its parent, the document root
                        let at = if value.is_some() {
                            format!("/{}", names[f])
                        } else {
                            String::new()
                        };
                        expected.push((at, (*code).to_owned()));
                    }
                }
                expected.sort();
                out.push(Case {
                    document: Value::Object(doc),
                    expected,
                });
            }
        }
    }
    out
}

// ----- N-Triples -----

/// Parses with an independent N-Triples parser; returns the statement count.
pub fn ntriples_statements(text: &str) -> Result<usize, String> {
    let mut n = 0;
    for t in oxttl::NTriplesParser::new().for_slice(text.as_bytes()) {
        t.map_err(|e| e.to_string())?;
        n += 1;
    }
    Ok(n)
}

/// Closed-form count for a fixture instance: one type statement, one per
/// literal, two per term (value and label) and one per non-empty element item.
pub fn expected_triples(instance: &Value) -> usize {
    fn count(v: &Value) -> usize {
        match v {
            Value::Array(items) => items.iter().map(count).sum(),
            Value::Object(o) if o.contains_key("@value") => 1,
            Value::Object(o) if o.contains_key("@id") => 2,
            Value::Object(o) => {
                let inner: usize = o
                    .iter()
                    .filter(|(k, _)| !k.starts_with('@'))
                    .map(|(_, v)| count(v))
                    .sum();
                inner + usize::from(inner > 0)
            }
            _ => 0,
        }
    }
    let fields: usize = instance
        .as_object()
        .unwrap()
        .iter()
        .filter(|(k, _)| !k.starts_with('@'))
        .map(|(_, v)| count(v))
        .sum();
    1 + fields
}

// ----- terminology -----

pub const ROOT_TERM: &str = "UBERON_0001062";

/// Descendants of the fixture root, read off the taxonomy by hand.
pub fn root_descendants() -> BTreeSet<String> {
    [
        "UBERON_0000062",
        "UBERON_0000479",
        "UBERON_0002107",
        "UBERON_0002048",
        "UBERON_0000483",
        "UBERON_0002385",
    ]
    .iter()
    .map(|l| obo(l))
    .collect()
}

/// A constraint made of an organ branch (root excluded), a literal entry for
/// epithelium and a value set holding muscle tissue, plus six probe IRIs with
/// their membership in the union worked out by hand.
pub fn union_probe(
    terminology: &Terminology,
    folder: &ResourceId,
    actor: &ResourceId,
) -> (ValueConstraintSet, Vec<(String, bool)>) {
    let set = terminology
        .create_value_set(
            "muscles",
            vec![ValueSetMember {
                iri: obo("UBERON_0002385"),
                label: "muscle tissue".into(),
            }],
            folder,
            actor,
        )
        .unwrap();
    let constraint = ValueConstraintSet {
        sources: vec![
            ConstraintSource::OntologyBranch {
                source: "UBERON".into(),
                root_iri: obo("UBERON_0000062"),
                include_root: false,
            },
            ConstraintSource::LiteralList {
                entries: vec![LiteralEntry {
                    label: "epithelium".into(),
                    iri: Some(obo("UBERON_0000483")),
                }],
            },
            ConstraintSource::ValueSet { value_set_id: set.id },
        ],
    };
    let probes = vec![
        (obo("UBERON_0000062"), false),
        (obo("UBERON_0002107"), true),
        (obo("UBERON_0000483"), true),
        (obo("UBERON_0002385"), true),
        (obo("UBERON_0000479"), false),
        ("http://example.org/elsewhere".to_owned(), false),
    ];
    (constraint, probes)
}
