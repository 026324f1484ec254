//! Interactive debugging: an observer that streams sequence events to an
//! attached client and suspends for its decision, the transport it uses, and
//! a headless client for scripted sessions.

pub mod protocol;
pub mod server;

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread::{self, JoinHandle};

use graftool_core::{Control, Event, Graph, Observer};
use serde_json::{json, Value};

use crate::style::StyleRegistry;
pub use protocol::Command;
pub use server::{DebugServer, Incoming, Session};

/// Sends the whole graph as a `GraphSnapshot` record.
pub fn send_snapshot(session: &mut Session, g: &Graph, styles: &StyleRegistry) {
    let mut rec = protocol::snapshot_json(g, styles);
    rec["type"] = json!("GraphSnapshot");
    session.send(rec);
}

/// A snapshot answering a request during a suspension. It is marked
/// suspended because the engine still waits for a decision.
fn send_requested_snapshot(session: &mut Session, g: &Graph, styles: &StyleRegistry) {
    let mut rec = protocol::snapshot_json(g, styles);
    rec["type"] = json!("GraphSnapshot");
    rec["suspended"] = json!(true);
    session.send(rec);
}

pub fn send_error(session: &mut Session, message: &str) {
    session.send(json!({ "type": "Error", "message": message }));
}

/// Bridges engine events to a session. Starts in stepping mode: every match
/// and every rewrite waits for `step`, `continue` or `abort`. After
/// `continue` events keep flowing but nothing waits.
pub struct DebugObserver<'a> {
    session: &'a mut Session,
    styles: &'a StyleRegistry,
    stepping: bool,
}

impl<'a> DebugObserver<'a> {
    pub fn new(session: &'a mut Session, styles: &'a StyleRegistry) -> Self {
        DebugObserver {
            session,
            styles,
            stepping: true,
        }
    }

    /// Reports a failed sequence to the client.
    pub fn error(&mut self, message: &str) {
        send_error(self.session, message);
    }

    fn wait(&mut self, g: &Graph) -> Control {
        loop {
            match self.session.next_command() {
                Incoming::Command(Command::Step) => return Control::Continue,
                Incoming::Command(Command::Continue) => {
                    self.stepping = false;
                    return Control::Continue;
                }
                Incoming::Command(Command::Abort) | Incoming::Closed => return Control::Abort,
                Incoming::Command(Command::Snapshot) => send_requested_snapshot(self.session, g, self.styles),
                Incoming::Command(Command::Hello) => {}
            }
        }
    }
}

impl Observer for DebugObserver<'_> {
    fn event(&mut self, event: &Event<'_>, g: &Graph) -> Control {
        let suspend = self.stepping;
        match event {
            Event::SequenceStarted { text } => {
                self.session.send(json!({ "type": "SequenceStarted", "text": text }));
                send_snapshot(self.session, g, self.styles);
                Control::Continue
            }
            Event::MatchFound { rule, bindings } => {
                let b: Vec<Value> = bindings.iter().map(|(n, id)| json!({ "name": n, "id": id.0 })).collect();
                self.session.send(json!({ "type": "MatchFound", "rule": rule, "bindings": b, "suspended": suspend }));
                if suspend { self.wait(g) } else { Control::Continue }
            }
            Event::PreApply { rule } => {
                self.session.send(json!({ "type": "PreApply", "rule": rule, "suspended": suspend }));
                if suspend { self.wait(g) } else { Control::Continue }
            }
            Event::PostApply { rule, delta } => {
                let d = protocol::delta_json(g, self.styles, delta);
                self.session.send(json!({ "type": "PostApply", "rule": rule, "delta": d }));
                Control::Continue
            }
            Event::SequenceFinished { result } => {
                self.session.send(json!({ "type": "SequenceFinished", "result": result }));
                Control::Continue
            }
        }
    }
}

/// Headless client speaking the line protocol. `policy` answers every
/// suspended event; the log of all received records is returned when the
/// server closes the connection.
pub struct ScriptedClient {
    handle: JoinHandle<io::Result<Vec<Value>>>,
}

impl ScriptedClient {
    pub fn connect<F>(addr: SocketAddr, mut policy: F) -> io::Result<ScriptedClient>
    where
        F: FnMut(&Value) -> Command + Send + 'static,
    {
        let stream = TcpStream::connect(addr)?;
        let mut writer = stream.try_clone()?;
        writer.write_all(b"hello\n")?;
        let handle = thread::spawn(move || {
            let mut log = Vec::new();
            for line in BufReader::new(stream).lines() {
                let line = line?;
                let Ok(rec) = serde_json::from_str::<Value>(&line) else { continue };
                let suspended = rec.get("suspended").and_then(Value::as_bool).unwrap_or(false);
                let reply = suspended.then(|| policy(&rec));
                log.push(rec);
                if let Some(cmd) = reply {
                    // The server may already be gone after an abort.
                    if writeln!(writer, "{}", cmd.to_json()).is_err() {
                        break;
                    }
                }
            }
            Ok(log)
        });
        Ok(ScriptedClient { handle })
    }

    /// Waits for the server to hang up and returns the event log.
    pub fn finish(self) -> io::Result<Vec<Value>> {
        self.handle.join().map_err(|_| io::Error::other("client thread panicked"))?
    }
}
