//! Client side of the scoring bridge: newline-delimited JSON records over a
//! TCP stream or a child process's stdio.
//!
//! ```text
//! -> {"id":1,"target":"chair","prompts":["..."],"view":{"pose":[x,y,h],"episode":0,"step":3}}
//! <- {"id":1,"scores":[0.21,0.19]}
//! ```
//!
//! Exactly one request is outstanding at a time and response ids must echo
//! the request id.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{ScoreSample, ScoreSource, ViewRequest};
use crate::error::{Error, Result};
use crate::grid::Pose;

/// Environment variable that overrides the configured bridge endpoint.
pub const ENDPOINT_ENV: &str = "BANDITNAV_SENSOR_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewDescriptor {
    pub pose: [f64; 3],
    pub episode: u64,
    pub step: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
}

impl ViewDescriptor {
    pub fn new(pose: &Pose, episode: u64, step: u64) -> Self {
        Self {
            pose: [pose.x, pose.y, pose.heading],
            episode,
            step,
            image_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeRequest {
    pub id: u64,
    pub target: String,
    pub prompts: Vec<String>,
    pub view: ViewDescriptor,
}

/// A response record as sent by the server: either scores or an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Where the bridge server lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `host:port`, optionally written `tcp://host:port`.
    Tcp(String),
    /// `exec:<command>`: spawn the command and talk over its stdin/stdout.
    Exec(String),
}

impl Endpoint {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(cmd) = s.strip_prefix("exec:") {
            if cmd.trim().is_empty() {
                return Err(Error::Config("empty bridge command".into()));
            }
            return Ok(Self::Exec(cmd.trim().to_owned()));
        }
        let addr = s.strip_prefix("tcp://").unwrap_or(s);
        if addr.is_empty() || !addr.contains(':') {
            return Err(Error::Config(format!("bad bridge endpoint {s:?}")));
        }
        Ok(Self::Tcp(addr.to_owned()))
    }

    /// The configured endpoint unless the environment overrides it.
    pub fn resolve(configured: Option<&str>) -> Result<Self> {
        match std::env::var(ENDPOINT_ENV) {
            Ok(v) if !v.trim().is_empty() => Self::parse(&v),
            _ => configured
                .map(Self::parse)
                .unwrap_or_else(|| Err(Error::Config("no bridge endpoint configured".into()))),
        }
    }
}

/// Sequential request/response client over any line-oriented transport.
pub struct BridgeClient<R, W> {
    reader: R,
    writer: W,
    next_id: u64,
    line: String,
}

impl<R: BufRead, W: Write> BridgeClient<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self {
            reader,
            writer,
            next_id: 1,
            line: String::new(),
        }
    }

    /// Sends one request and validates the matching response.
    pub fn observe(&mut self, target: &str, prompts: &[String], view: ViewDescriptor) -> Result<ScoreSample> {
        if prompts.is_empty() {
            return Err(Error::InvalidEnsemble("no prompts".into()));
        }
        let id = self.next_id;
        self.next_id += 1;
        let request = BridgeRequest {
            id,
            target: target.to_owned(),
            prompts: prompts.to_vec(),
            view,
        };
        let mut encoded = serde_json::to_string(&request).map_err(|e| Error::Config(e.to_string()))?;
        encoded.push('\n');
        self.writer.write_all(encoded.as_bytes())?;
        self.writer.flush()?;

        self.line.clear();
        if self.reader.read_line(&mut self.line)? == 0 {
            return Err(Error::Transport(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "bridge closed the connection",
            )));
        }
        parse_response(&self.line, id, prompts.len())
    }
}

/// Validates one response line against the request it answers.
pub fn parse_response(line: &str, expected_id: u64, expected_count: usize) -> Result<ScoreSample> {
    let response: BridgeResponse =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::MalformedResponse(e.to_string()))?;
    if response.id != expected_id {
        return Err(Error::IdMismatch {
            expected: expected_id,
            got: response.id,
        });
    }
    if let Some(msg) = response.error {
        return Err(Error::Remote(msg));
    }
    let scores = response
        .scores
        .ok_or_else(|| Error::MalformedResponse("missing scores".into()))?;
    if scores.len() != expected_count {
        return Err(Error::ScoreCount {
            expected: expected_count,
            got: scores.len(),
        });
    }
    ScoreSample::new(scores)
}

pub type TcpBridge = BridgeClient<BufReader<TcpStream>, BufWriter<TcpStream>>;

impl TcpBridge {
    pub fn connect(addr: &str) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Self::new(reader, BufWriter::new(stream)))
    }
}

/// A bridge server running as a child process.
pub struct ProcessBridge {
    client: BridgeClient<BufReader<ChildStdout>, ChildStdin>,
    child: Child,
}

impl ProcessBridge {
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self {
            client: BridgeClient::new(BufReader::new(stdout), stdin),
            child,
        })
    }
}

impl Drop for ProcessBridge {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum Transport {
    Tcp(TcpBridge),
    Process(ProcessBridge),
}

/// [`ScoreSource`] backed by a live bridge server.
pub struct BridgeSource {
    transport: Transport,
    ensemble: super::PromptEnsemble,
}

impl BridgeSource {
    pub fn connect(endpoint: &Endpoint, ensemble: super::PromptEnsemble) -> Result<Self> {
        let transport = match endpoint {
            Endpoint::Tcp(addr) => Transport::Tcp(TcpBridge::connect(addr)?),
            Endpoint::Exec(cmd) => Transport::Process(ProcessBridge::spawn(cmd)?),
        };
        Ok(Self { transport, ensemble })
    }
}

impl ScoreSource for BridgeSource {
    fn sample(&mut self, view: &ViewRequest<'_>) -> Result<ScoreSample> {
        let prompts = self.ensemble.instantiate(view.target)?;
        let descriptor = ViewDescriptor::new(&view.pose, view.episode, view.step);
        match &mut self.transport {
            Transport::Tcp(c) => c.observe(view.target, &prompts, descriptor),
            Transport::Process(p) => p.client.observe(view.target, &prompts, descriptor),
        }
    }
}
