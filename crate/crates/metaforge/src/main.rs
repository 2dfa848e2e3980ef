use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use metaforge::config::Config;
use metaforge::error::{Code, Error, Result};
use metaforge::render::{self, ExportFormat};
use metaforge::repository::{root_folder, system_user, Content, NewResource, Repository, ResourceType};
use metaforge::service::{check_instance, recommend_from, ContextEntry, Service};
use metaforge::terminology::{Terminology, ValueSet};
use metaforge::{api, mock};
use metaforge_core::compiler::compile;
use metaforge_core::model::{
    parse_instance, parse_template, template_to_json, MetadataInstance, ResolvedTemplate, TemplateKind,
};
use metaforge_core::recommender::index_corpus;

#[derive(Parser)]
#[command(name = "metaforge", version, about = "Metadata template workbench")]
struct Cli {
    /// Skip ontology-branch term checks instead of contacting the terminology service.
    #[arg(long, global = true)]
    offline: bool,
    #[arg(long, global = true, env = "METAFORGE_DATA_DIR", default_value = "./data")]
    data_dir: PathBuf,
    #[arg(long, global = true, env = "METAFORGE_TERMINOLOGY_URL")]
    terminology_url: Option<String>,
    #[arg(long, global = true, env = "METAFORGE_TERMINOLOGY_APIKEY", hide_env_values = true)]
    terminology_apikey: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the JSON Schema of a template.
    Compile {
        template: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Directory of elements, fields and value sets the template references.
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Validate instances; one JSON report per line.
    Validate {
        #[arg(long)]
        template: PathBuf,
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Export an instance as N-Triples, JSON-LD or TSV.
    Export {
        #[arg(long, default_value = "ntriples")]
        format: String,
        #[arg(long)]
        template: PathBuf,
        instance: PathBuf,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Suggest values for a field from a directory of instances.
    Recommend {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        target: String,
        /// `path=value`; the value is read as JSON when it parses, else as text.
        #[arg(long = "context")]
        context: Vec<String>,
        #[arg(short = 'k', default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        min_support: u64,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "METAFORGE_PORT", default_value_t = metaforge::config::DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "METAFORGE_TERMINOLOGY_TTL_SECS", default_value_t = 600)]
        terminology_ttl_secs: u64,
    },
    /// Manage users of the data directory.
    User {
        #[command(subcommand)]
        command: UserCommand,
    },
    /// Run the bundled terminology, validator and submission mocks.
    MockServices,
}

#[derive(Subcommand)]
enum UserCommand {
    /// Create a user and print its API key.
    Add { name: String },
}

fn exit_code_for(e: &Error) -> u8 {
    match e.code {
        Code::InvalidRequest => 2,
        _ => 3,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", e.body());
    ExitCode::from(exit_code_for(e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::new(Code::Io, format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        e
    })
}

struct Workspace {
    service: Service,
    offline: bool,
}

impl Workspace {
    /// In-memory service holding the referenced library resources.
    fn new(cli: &Cli, lib: Option<&Path>) -> Result<Workspace> {
        let repo = Arc::new(Repository::in_memory());
        let remote = if cli.offline {
            None
        } else {
            Config {
                terminology_url: cli.terminology_url.clone(),
                terminology_api_key: cli.terminology_apikey.clone(),
                ..Config::default()
            }
            .remote()
        };
        let terminology = Arc::new(Terminology::new(repo.clone(), remote));
        let service = Service::new(repo, terminology, Vec::new());
        if let Some(dir) = lib {
            load_lib(&service.repo, dir)?;
        }
        Ok(Workspace {
            service,
            offline: cli.offline,
        })
    }

    fn template(&self, path: &Path) -> Result<ResolvedTemplate> {
        let t = with_file(path, parse_template(&read(path)?).map_err(Error::from))?;
        if t.kind != TemplateKind::Template {
            return Err(Error::new(
                Code::InvalidPayload,
                format!("{} is a {}, not a template", path.display(), t.kind.as_str()),
            ));
        }
        with_file(path, self.service.resolve(&t))
    }
}

fn load_lib(repo: &Repository, dir: &Path) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for path in files {
        let text = read(&path)?;
        let (id, resource_type, content) = if let Ok(set) = serde_json::from_str::<ValueSet>(&text) {
            let set = ValueSet {
                id: set.id.clone(),
                ..metaforge::terminology::check_value_set(&set.name, set.members)?
            };
            let payload = serde_json::to_string(&set).expect("value sets serialize");
            (
                set.id.clone(),
                ResourceType::ValueSet,
                Content {
                    name: set.name,
                    payload,
                    ..Content::default()
                },
            )
        } else {
            let t = with_file(&path, parse_template(&text).map_err(Error::from))?;
            let ty = match t.kind {
                TemplateKind::Template => ResourceType::Template,
                TemplateKind::Element => ResourceType::Element,
                TemplateKind::Field => ResourceType::Field,
            };
            let payload = template_to_json(&t).to_compact();
            (
                t.id.clone(),
                ty,
                Content {
                    name: t.name.clone(),
                    payload,
                    ..Content::default()
                },
            )
        };
        repo.create(
            NewResource {
                id,
                resource_type,
                parent_folder: root_folder(),
                content,
                extra_acl: Vec::new(),
            },
            &system_user(),
        )?;
    }
    Ok(())
}

fn instance(path: &Path) -> Result<MetadataInstance> {
    with_file(path, parse_instance(&read(path)?).map_err(Error::from))
}

fn parse_context(raw: &[String]) -> Result<Vec<ContextEntry>> {
    raw.iter()
        .map(|c| {
            let (path, value) = c
                .split_once('=')
                .ok_or_else(|| Error::new(Code::InvalidRequest, format!("--context `{c}` is not path=value")))?;
            let value = serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.to_owned()));
            Ok(ContextEntry {
                path: path.to_owned(),
                value,
            })
        })
        .collect()
}

fn out(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Compile { template, output, lib } => {
            let ws = Workspace::new(cli, lib.as_deref())?;
            let schema = compile(&ws.template(template)?).schema_doc;
            match output {
                Some(path) => std::fs::write(path, schema)?,
                None => out(&schema)?,
            }
            Ok(0)
        }
        Command::Validate {
            template,
            instances,
            lib,
        } => {
            let ws = Workspace::new(cli, lib.as_deref())?;
            let rt = ws.template(template)?;
            let mut status = 0;
            for path in instances {
                let m = instance(path)?;
                let (report, skipped) = with_file(path, check_instance(&ws.service.terminology, ws.offline, &rt, &m))?;
                for iri in skipped {
                    let warning = serde_json::json!({
                        "warning": "TERM_CHECK_SKIPPED",
                        "message": format!("{}: branch membership of <{iri}> not checked (offline)", path.display()),
                    });
                    eprintln!("{warning}");
                }
                out(&render::report(&report))?;
                if !report.valid {
                    status = 1;
                }
            }
            Ok(status)
        }
        Command::Export {
            format,
            template,
            instance: path,
            lib,
        } => {
            let format = ExportFormat::parse(format)?;
            let ws = Workspace::new(cli, lib.as_deref())?;
            let rt = ws.template(template)?;
            let m = instance(path)?;
            out(&render::export(&rt, &m, format)?)?;
            Ok(0)
        }
        Command::Recommend {
            corpus,
            template,
            target,
            context,
            k,
            min_support,
            lib,
        } => {
            let ws = Workspace::new(cli, lib.as_deref())?;
            let rt = ws.template(template)?;
            let mut files: Vec<PathBuf> = std::fs::read_dir(corpus)
                .map_err(|e| Error::new(Code::Io, format!("{}: {e}", corpus.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let instances = files.iter().map(|p| instance(p)).collect::<Result<Vec<_>>>()?;
            let index = index_corpus(rt.id.clone(), &instances)?;
            let list = recommend_from(&rt, &index, target, &parse_context(context)?, *k, *min_support)?;
            out(&render::suggestions(&list))?;
            Ok(0)
        }
        Command::Serve {
            port,
            terminology_ttl_secs,
        } => {
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let config = Config {
                data_dir: cli.data_dir.clone(),
                port: *port,
                terminology_url: cli.terminology_url.clone(),
                terminology_api_key: cli.terminology_apikey.clone(),
                terminology_ttl: Duration::from_secs(*terminology_ttl_secs),
            };
            let service = Arc::new(config.open_service()?);
            api::serve(service, config.port)?;
            Ok(0)
        }
        Command::User {
            command: UserCommand::Add { name },
        } => {
            let repo = Repository::open(&cli.data_dir)?;
            let (user, token) = repo.create_user(name)?;
            let body = serde_json::json!({
                "id": user.id,
                "name": user.name,
                "homeFolder": user.home_folder,
                "token": token,
            });
            out(&render::pretty(&body))?;
            Ok(0)
        }
        Command::MockServices => {
            let terminology = mock::spawn_terminology(mock::TerminologyMock::new(mock::Taxonomy::fixture()))?;
            let validator = mock::spawn_validator(mock::ValidatorMock::accepting())?;
            let submission = mock::spawn_submission(mock::SubmissionMock::new())?;
            let body = serde_json::json!({
                "terminologyUrl": terminology.url(),
                "validatorUrl": validator.url(),
                "submissionUrl": submission.url(),
            });
            out(&render::pretty(&body))?;
            loop {
                std::thread::park();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let body = serde_json::json!({"error": "USAGE", "message": e.to_string().trim_end()});
            eprintln!("{body}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
