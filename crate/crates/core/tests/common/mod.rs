#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gptscore::datasets::{Dataset, GenSample, SystemOutput};
use gptscore::Task;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Minimal HTTP/1.1 server answering each request with the next scripted
/// response, then with the fallback.
pub struct StubServer {
    pub url: String,
    state: Arc<Mutex<StubState>>,
}

struct StubState {
    script: Vec<(u16, String)>,
    fallback: (u16, String),
    requests: Vec<Request>,
}

#[derive(Debug, Clone)]
pub struct Request {
    pub path: String,
    pub authorization: Option<String>,
    pub body: serde_json::Value,
}

impl StubServer {
    pub fn start(script: Vec<(u16, String)>, fallback: (u16, String)) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let url = format!("http://{}", listener.local_addr().unwrap());
        let state = Arc::new(Mutex::new(StubState {
            script: script.into_iter().rev().collect(),
            fallback,
            requests: Vec::new(),
        }));
        let shared = Arc::clone(&state);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let shared = Arc::clone(&shared);
                std::thread::spawn(move || handle(stream, &shared));
            }
        });
        StubServer { url, state }
    }

    /// Always answers with `body` and status 200.
    pub fn ok(body: String) -> Self {
        Self::start(Vec::new(), (200, body))
    }

    pub fn request_count(&self) -> usize {
        self.state.lock().unwrap().requests.len()
    }

    pub fn requests(&self) -> Vec<Request> {
        self.state.lock().unwrap().requests.clone()
    }
}

fn handle(stream: TcpStream, state: &Mutex<StubState>) {
    let mut reader = BufReader::new(stream.try_clone().expect("clone"));
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
        let mut len = 0usize;
        let mut auth = None;
        loop {
            let mut h = String::new();
            if reader.read_line(&mut h).unwrap_or(0) == 0 {
                return;
            }
            let h = h.trim_end();
            if h.is_empty() {
                break;
            }
            let (name, value) = h.split_once(':').unwrap_or((h, ""));
            match name.to_ascii_lowercase().as_str() {
                "content-length" => len = value.trim().parse().unwrap_or(0),
                "authorization" => auth = Some(value.trim().to_string()),
                _ => {}
            }
        }
        let mut body = vec![0u8; len];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        let (status, text) = {
            let mut s = state.lock().unwrap();
            s.requests.push(Request {
                path,
                authorization: auth,
                body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
            });
            s.script.pop().unwrap_or_else(|| s.fallback.clone())
        };
        let reply = format!(
            "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{text}",
            text.len()
        );
        let mut w = &stream;
        if w.write_all(reply.as_bytes()).is_err() {
            return;
        }
    }
}

pub fn write_dataset(path: &Path, samples: &[GenSample]) {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).unwrap());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

pub const WORDS: [&str; 24] = [
    "the", "cat", "sat", "on", "a", "mat", "dog", "ran", "to", "park", "bird", "sang", "in",
    "tree", "sun", "rose", "over", "hill", "rain", "fell", "and", "wind", "blew", "softly",
];

pub fn sentence(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    let words: Vec<&str> = (0..n)
        .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
        .collect();
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// Random scores for every aspect in `aspects`.
pub fn scores(rng: &mut ChaCha8Rng, aspects: &[&str]) -> BTreeMap<String, f64> {
    aspects
        .iter()
        .map(|a| (a.to_string(), (rng.gen_range(1..=50) as f64) / 10.0))
        .collect()
}

pub fn summ_samples(n: usize, systems: usize, aspects: &[&str], seed: u64) -> Vec<GenSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| GenSample {
            sample_id: format!("s{i}"),
            task: Task::Summ,
            source: sentence(&mut rng, 12, 20),
            references: vec![sentence(&mut rng, 4, 8)],
            outputs: (0..systems)
                .map(|j| SystemOutput {
                    system_id: format!("sys{j}"),
                    text: sentence(&mut rng, 3, 8),
                    human_scores: scores(&mut rng, aspects),
                })
                .collect(),
        })
        .collect()
}

pub const DIAG_ASPECTS: [&str; 9] = [
    "INT", "ENG", "SPE", "COR", "REL", "UND", "SEM", "FLU", "DIV",
];

pub fn turn_samples(n: usize, systems: usize, seed: u64) -> Vec<GenSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| GenSample {
            sample_id: format!("t{i}"),
            task: Task::DiagTurn,
            source: format!(
                "Human: {}\nAI: {}\nHuman: {}",
                sentence(&mut rng, 3, 6),
                sentence(&mut rng, 3, 6),
                sentence(&mut rng, 3, 6)
            ),
            references: Vec::new(),
            outputs: (0..systems)
                .map(|j| SystemOutput {
                    system_id: format!("bot{j}"),
                    text: format!("AI: {}", sentence(&mut rng, 3, 7)),
                    human_scores: scores(&mut rng, &DIAG_ASPECTS),
                })
                .collect(),
        })
        .collect()
}

pub fn dataset(name: &str, task: Task, samples: Vec<GenSample>) -> Dataset {
    Dataset::new(name, task, samples).expect("valid dataset")
}

pub mod golden {
    use std::path::PathBuf;

    use gptscore::datasets::{GenSample, SystemOutput};
    use gptscore::prompt::{builtin_templates, render, Demonstration, RenderedPrompt};
    use gptscore::{Setting, Task};

    pub const KS: [usize; 2] = [0, 2];

    pub fn dir() -> PathBuf {
        super::fixture("golden")
    }

    fn sample(
        task: Task,
        id: &str,
        source: &str,
        reference: &str,
        hypo: &str,
    ) -> (GenSample, SystemOutput) {
        let out = SystemOutput {
            system_id: "sys".into(),
            text: hypo.into(),
            human_scores: Default::default(),
        };
        let s = GenSample {
            sample_id: id.into(),
            task,
            source: source.into(),
            references: if reference.is_empty() {
                vec![]
            } else {
                vec![reference.into()]
            },
            outputs: vec![out.clone()],
        };
        (s, out)
    }

    /// Evaluated sample plus two exemplars for a task.
    fn material(task: Task) -> [(GenSample, SystemOutput); 3] {
        match task {
            Task::Summ => [
                sample(task, "e", "The council approved the new park budget on Monday after a long debate.", "Council approves park budget.", "The park budget was approved."),
                sample(task, "d1", "Heavy rain flooded several streets in the old town overnight.", "Rain floods old town.", "Streets flooded after rain."),
                sample(task, "d2", "The museum will reopen next month with a new dinosaur exhibit.", "Museum reopens with dinosaurs.", "Museum to reopen next month."),
            ],
            Task::Mt | Task::D2t => [
                sample(task, "e", "Die Katze schläft auf dem Sofa.", "The cat is sleeping on the sofa.", "The cat sleeps on the couch."),
                sample(task, "d1", "Es regnet heute.", "It is raining today.", "Today it rains."),
                sample(task, "d2", "Ich habe Hunger.", "I am hungry.", "I have hunger."),
            ],
            Task::DiagTurn | Task::DiagDialog => [
                sample(task, "e", "Human: Hi! What are you doing this weekend?\nAI: I might go hiking.\nHuman: Where to?", "", "AI: Probably the hills near the lake."),
                sample(task, "d1", "Human: Do you like music?", "", "AI: Yes, mostly jazz."),
                sample(task, "d2", "Human: Any book recommendations?", "", "AI: Try a mystery novel."),
            ],
        }
    }

    pub fn file_name(template_id: &str, k: usize) -> String {
        format!("{}.k{k}.txt", template_id.replace('/', "_"))
    }

    /// Every builtin template rendered for each K; IST for K = 0, IDM otherwise.
    pub fn cases() -> Vec<(String, RenderedPrompt)> {
        let mut out = Vec::new();
        for tpl in builtin_templates().iter() {
            let [(s, o), d1, d2] = material(tpl.task);
            let demos = [
                Demonstration::from_sample(&d1.0, &d1.1),
                Demonstration::from_sample(&d2.0, &d2.1),
            ];
            for k in KS {
                let setting = if k == 0 { Setting::Ist } else { Setting::Idm };
                let p = render(tpl, setting, &s, &o, &demos[..k]).expect("builtin renders");
                out.push((file_name(&tpl.id(), k), p));
            }
        }
        out
    }

    /// Compares (or, with UPDATE_GOLDEN=1, rewrites) every golden file and
    /// returns the names that differ.
    pub fn check() -> Vec<String> {
        let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
        let dir = dir();
        std::fs::create_dir_all(&dir).unwrap();
        let mut bad = Vec::new();
        for (name, p) in cases() {
            let path = dir.join(&name);
            let text = p.full();
            if update {
                std::fs::write(&path, &text).unwrap();
                continue;
            }
            match std::fs::read(&path) {
                Ok(bytes) if bytes == text.as_bytes() && text.ends_with(&p.target) => {}
                _ => bad.push(name),
            }
        }
        bad
    }
}
