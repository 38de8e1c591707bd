//! Request and response types shared by the HTTP service and the CLI. Both
//! call the same [`Workbench`] methods and render with [`to_wire`], so a
//! logical request yields the same bytes either way.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use numeracy_core::assessment::{
    cohort_stats, generate_battery, score_all, BatteryConfig, Grade, ItemSet, LowThreshold, ProfileSet, Response,
    StatsReport, DEFAULT_ITEMS_PER_SUBTEST,
};
use numeracy_core::rectangles::{
    enumerate_derivations, house, Derivation, HouseCell, KnownFactBase, PlanOptions, RectDiagram,
};
use numeracy_core::session::{encode_event, now_millis, Catalog, EventBody, Session, SessionEvent, SessionState};
use numeracy_core::transcoder::{transcode, Code, Rendering, Transcription};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

pub const WIRE_VERSION: u32 = 1;

/// Factors served when a request names none: doubles, fives and tens.
pub const DEFAULT_FACTORS: [u32; 3] = [2, 5, 10];
pub const DEFAULT_MAX_DEPTH: u8 = 3;
pub const DEFAULT_MAX_GHOST: u8 = 3;
pub const DEFAULT_ENUMERATION_SHOWN: usize = 50;

/// Pretty JSON with a trailing newline.
pub fn to_wire<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("wire types always serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Transcoding
// ---------------------------------------------------------------------------

/// Either a bare `value` or a `rendering` in code `from`, and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscodeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<Code>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendering: Option<Rendering>,
    pub to: Code,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscodeResponse {
    pub version: u32,
    pub value: u32,
    pub code: Code,
    pub rendering: Rendering,
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

fn default_factors() -> Vec<u32> {
    DEFAULT_FACTORS.to_vec()
}

fn default_depth() -> u8 {
    DEFAULT_MAX_DEPTH
}

fn default_ghost_width() -> u8 {
    DEFAULT_MAX_GHOST
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveRequest {
    pub rect: RectDiagram,
    #[serde(default = "default_factors")]
    pub base: Vec<u32>,
    #[serde(default = "default_depth")]
    pub max_depth: u8,
    #[serde(default)]
    pub ghost: bool,
    #[serde(default = "default_ghost_width")]
    pub max_ghost: u8,
}

impl DeriveRequest {
    pub fn new(rect: RectDiagram) -> Self {
        DeriveRequest {
            rect,
            base: default_factors(),
            max_depth: DEFAULT_MAX_DEPTH,
            ghost: false,
            max_ghost: DEFAULT_MAX_GHOST,
        }
    }

    fn options(&self) -> PlanOptions {
        PlanOptions {
            max_depth: self.max_depth,
            allow_ghost: self.ghost,
            max_ghost: self.max_ghost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveResponse {
    pub version: u32,
    pub rect: RectDiagram,
    pub base: Vec<u32>,
    pub cost: u32,
    pub value: u32,
    pub headline: String,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateRequest {
    #[serde(flatten)]
    pub query: DeriveRequest,
    /// How many derivations to list, best first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    /// A learner's construction to look up among all derivations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateResponse {
    pub version: u32,
    pub rect: RectDiagram,
    pub base: Vec<u32>,
    pub count: usize,
    pub min_cost: u32,
    pub derivations: Vec<Derivation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseResponse {
    pub version: u32,
    pub base: Vec<u32>,
    pub cells: Vec<HouseCell>,
}

/// Parses `2,5,10`. An empty string is the empty list.
pub fn parse_factors(text: &str) -> Result<Vec<u32>, ApiError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ApiError::bad_request(format!("factor {s:?} is not a number"))))
        .collect()
}

// ---------------------------------------------------------------------------
// Battery and cohort
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub grade: Grade,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items_per_subtest: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub items: ItemSet,
    pub responses: Vec<Response>,
    #[serde(default)]
    pub low_threshold: LowThreshold,
    /// Scores from an external instrument, by student id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external_scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRequest {
    pub a: ProfileSet,
    pub b: ProfileSet,
    pub cutoff: f64,
}

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSessionRequest {
    pub student_ref: String,
    pub activity_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<u64>,
}

/// An event posted by a client; the session id comes from the route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientEvent {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<u64>,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub version: u32,
    pub events: usize,
    pub state: SessionState,
}

impl SessionView {
    fn of(session: &Session) -> Self {
        SessionView {
            version: WIRE_VERSION,
            events: session.log().len(),
            state: session.state().clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Session store
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum IdSource {
    Random,
    Sequential(AtomicU64),
}

#[derive(Debug, Clone, Copy)]
enum Clock {
    System,
    Fixed(u64),
}

/// Open sessions, one lock each, backed by `sessions/{id}.jsonl`.
#[derive(Debug, Default)]
struct SessionStore {
    dir: Option<PathBuf>,
    open: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_hexdigit() || c == '-')
}

fn io_error(path: &Path, e: std::io::Error) -> ApiError {
    numeracy_core::session::SessionError::Io(format!("{}: {e}", path.display())).into()
}

impl SessionStore {
    fn path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.jsonl")))
    }

    fn insert(&self, session: Session) -> Result<Arc<Mutex<Session>>, ApiError> {
        if let Some(path) = self.path(session.id()) {
            std::fs::write(&path, session.save()).map_err(|e| io_error(&path, e))?;
        }
        let id = session.id().to_string();
        let handle = Arc::new(Mutex::new(session));
        self.open.lock().expect("store lock").insert(id, handle.clone());
        Ok(handle)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found("session"));
        }
        let mut open = self.open.lock().expect("store lock");
        if let Some(handle) = open.get(id) {
            return Ok(handle.clone());
        }
        let path = self.path(id).ok_or_else(|| ApiError::not_found("session"))?;
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ApiError::not_found("session")),
            Err(e) => return Err(io_error(&path, e)),
        };
        let handle = Arc::new(Mutex::new(Session::load(&text)?));
        open.insert(id.to_string(), handle.clone());
        Ok(handle)
    }

    fn append(&self, event: &SessionEvent) -> Result<(), ApiError> {
        let Some(path) = self.path(&event.session_id) else {
            return Ok(());
        };
        let mut file = OpenOptions::new().append(true).open(&path).map_err(|e| io_error(&path, e))?;
        writeln!(file, "{}", encode_event(event)).map_err(|e| io_error(&path, e))
    }
}

// ---------------------------------------------------------------------------
// Workbench
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct Workbench {
    catalog: Catalog,
    store: SessionStore,
    ids: IdSource,
    clock: Clock,
}

impl Workbench {
    /// In-memory sessions and the built-in activities.
    pub fn in_memory() -> Self {
        Workbench {
            catalog: Catalog::builtin(),
            store: SessionStore::default(),
            ids: IdSource::Random,
            clock: Clock::System,
        }
    }

    /// Sessions under `data_dir/sessions`; extra activities from
    /// `data_dir/activities` when present.
    pub fn with_data_dir(data_dir: &Path) -> Result<Self, ApiError> {
        let sessions = data_dir.join("sessions");
        std::fs::create_dir_all(&sessions).map_err(|e| io_error(&sessions, e))?;
        let activities = data_dir.join("activities");
        let catalog = if activities.is_dir() {
            Catalog::with_dir(&activities)?
        } else {
            Catalog::builtin()
        };
        Ok(Workbench {
            catalog,
            store: SessionStore {
                dir: Some(sessions),
                open: Mutex::default(),
            },
            ids: IdSource::Random,
            clock: Clock::System,
        })
    }

    /// Sequential session ids and a fixed clock, for recorded fixtures.
    pub fn deterministic(mut self, ts: u64) -> Self {
        self.ids = IdSource::Sequential(AtomicU64::new(1));
        self.clock = Clock::Fixed(ts);
        self
    }

    fn now(&self) -> u64 {
        match self.clock {
            Clock::System => now_millis(),
            Clock::Fixed(ts) => ts,
        }
    }

    fn next_id(&self) -> Option<String> {
        match &self.ids {
            IdSource::Random => None,
            IdSource::Sequential(n) => Some(format!("00000000-0000-4000-8000-{:012x}", n.fetch_add(1, Ordering::SeqCst))),
        }
    }

    pub fn transcode(&self, req: &TranscodeRequest) -> Result<TranscodeResponse, ApiError> {
        let input = match (req.value, req.from, &req.rendering) {
            (Some(value), None, None) => Transcription::of(value, Code::Symbolic)?,
            (None, Some(from), Some(rendering)) => Transcription::parse(from, rendering.clone())?,
            _ => return Err(ApiError::bad_request("give either value, or from and rendering")),
        };
        let out = transcode(&input, req.to)?;
        Ok(TranscodeResponse {
            version: WIRE_VERSION,
            value: out.value(),
            code: out.code(),
            rendering: out.rendering().clone(),
        })
    }

    pub fn derive(&self, req: &DeriveRequest) -> Result<DeriveResponse, ApiError> {
        let base = KnownFactBase::from_factors(&req.base)?;
        let d = numeracy_core::rectangles::derive(req.rect, &base, req.options())?;
        Ok(DeriveResponse {
            version: WIRE_VERSION,
            rect: req.rect,
            base: req.base.clone(),
            cost: d.cost(),
            value: d.evaluate()?,
            headline: d.headline(),
            derivation: d,
        })
    }

    pub fn enumerate(&self, req: &EnumerateRequest) -> Result<EnumerateResponse, ApiError> {
        let q = &req.query;
        let base = KnownFactBase::from_factors(&q.base)?;
        let all = enumerate_derivations(q.rect, &base, q.options())?;
        let member = req.candidate.as_ref().map(|c| {
            let c = c.canonical();
            all.binary_search(&c).is_ok()
        });
        let min_cost = all.iter().map(Derivation::cost).min().unwrap_or(0);
        let count = all.len();
        let shown = req.limit.unwrap_or(DEFAULT_ENUMERATION_SHOWN);
        Ok(EnumerateResponse {
            version: WIRE_VERSION,
            rect: q.rect,
            base: q.base.clone(),
            count,
            min_cost,
            derivations: all.into_iter().take(shown).collect(),
            member,
        })
    }

    pub fn house(&self, factors: &[u32]) -> Result<HouseResponse, ApiError> {
        let base = KnownFactBase::from_factors(factors)?;
        Ok(HouseResponse {
            version: WIRE_VERSION,
            base: factors.to_vec(),
            cells: house(&base),
        })
    }

    pub fn generate(&self, req: &GenerateRequest) -> Result<ItemSet, ApiError> {
        let config = BatteryConfig {
            items_per_subtest: req.items_per_subtest.unwrap_or(DEFAULT_ITEMS_PER_SUBTEST),
        };
        Ok(generate_battery(req.grade, req.seed, config)?)
    }

    pub fn score(&self, req: &ScoreRequest) -> Result<ProfileSet, ApiError> {
        let mut set = score_all(&req.items, &req.responses, req.low_threshold)?;
        set.attach_external(&req.external_scores);
        Ok(set)
    }

    pub fn compare(&self, req: &CohortRequest) -> Result<StatsReport, ApiError> {
        Ok(cohort_stats(&req.a, &req.b, req.cutoff)?)
    }

    pub fn open_session(&self, req: &OpenSessionRequest) -> Result<SessionView, ApiError> {
        let ts = req.ts.unwrap_or_else(|| self.now());
        let session = match self.next_id() {
            Some(id) => Session::start_with_id(&self.catalog, &id, &req.student_ref, &req.activity_id, ts)?,
            None => Session::start(&self.catalog, &req.student_ref, &req.activity_id, ts)?,
        };
        let view = SessionView::of(&session);
        self.store.insert(session)?;
        Ok(view)
    }

    pub fn session(&self, id: &str) -> Result<SessionView, ApiError> {
        let handle = self.store.get(id)?;
        let session = handle.lock().expect("session lock");
        Ok(SessionView::of(&session))
    }

    /// Applies one client event. Events for a session are serialized by
    /// its lock; a gap in `seq` is rejected, never reordered.
    pub fn post_event(&self, id: &str, event: &ClientEvent) -> Result<SessionView, ApiError> {
        let handle = self.store.get(id)?;
        let mut session = handle.lock().expect("session lock");
        let event = SessionEvent {
            ts: event.ts.unwrap_or_else(|| self.now()),
            session_id: id.to_string(),
            seq: event.seq,
            body: event.body.clone(),
        };
        SessionState::step(Some(session.state()), &event)?;
        self.store.append(&event)?;
        session.apply(event)?;
        Ok(SessionView::of(&session))
    }
}
