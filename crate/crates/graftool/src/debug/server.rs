//! Debug transport. One listening port serves three kinds of clients:
//!
//! * raw TCP clients speaking newline-delimited JSON,
//! * browsers upgrading an HTTP request to a websocket (one JSON record
//!   per text message),
//! * plain HTTP GETs for the static viewer assets.
//!
//! Every connection runs on its own threads. The engine talks to the active
//! session through two channels, so a suspended sequence never blocks the
//! transport.

use std::io::{self, BufRead, BufReader, ErrorKind, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::thread;
use std::time::Duration;

use serde_json::Value;
use tungstenite::Message;

use super::protocol::Command;

/// What the transport hands the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incoming {
    Command(Command),
    Closed,
}

/// Engine side of one connected client.
pub struct Session {
    events: Sender<String>,
    commands: Receiver<Incoming>,
    alive: bool,
    step: u64,
}

impl Session {
    fn new(events: Sender<String>, commands: Receiver<Incoming>) -> Self {
        Session {
            events,
            commands,
            alive: true,
            step: 0,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Sends one event record, stamping it with the next step index.
    pub fn send(&mut self, mut record: Value) {
        if !self.alive {
            return;
        }
        record["step"] = Value::from(self.step);
        self.step += 1;
        if self.events.send(record.to_string()).is_err() {
            self.alive = false;
        }
    }

    /// Blocks until the client says something; a closed connection reads as
    /// [`Incoming::Closed`].
    pub fn next_command(&mut self) -> Incoming {
        if !self.alive {
            return Incoming::Closed;
        }
        match self.commands.recv() {
            Ok(Incoming::Command(c)) => Incoming::Command(c),
            Ok(Incoming::Closed) | Err(_) => {
                self.alive = false;
                Incoming::Closed
            }
        }
    }
}

pub struct DebugServer {
    addr: SocketAddr,
    sessions: Receiver<Session>,
    current: Option<Session>,
}

impl DebugServer {
    /// Binds `127.0.0.1:<port>` (0 picks a free port) and starts accepting.
    pub fn start(port: u16, ui_dir: Option<PathBuf>) -> io::Result<DebugServer> {
        let listener = TcpListener::bind(("127.0.0.1", port))?;
        let addr = listener.local_addr()?;
        let (tx, rx) = mpsc::channel();
        thread::Builder::new().name("debug-accept".into()).spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let tx = tx.clone();
                let ui = ui_dir.clone();
                let _ = thread::Builder::new()
                    .name("debug-conn".into())
                    .spawn(move || handle_connection(stream, tx, ui));
            }
        })?;
        Ok(DebugServer {
            addr,
            sessions: rx,
            current: None,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// The live session, waiting for a client to attach if there is none.
    pub fn session(&mut self) -> &mut Session {
        if !self.current.as_ref().is_some_and(Session::is_alive) {
            let s = match self.sessions.try_recv() {
                Ok(s) => s,
                Err(_) => {
                    eprintln!("waiting for a debugger to attach on {}", self.addr);
                    self.sessions.recv().expect("accept thread runs as long as the server")
                }
            };
            self.current = Some(s);
        }
        self.current.as_mut().expect("session just set")
    }

    /// The live session if a client is attached right now.
    pub fn attached(&mut self) -> Option<&mut Session> {
        if !self.current.as_ref().is_some_and(Session::is_alive) {
            self.current = self.sessions.try_recv().ok();
        }
        self.current.as_mut().filter(|s| s.is_alive())
    }
}

fn handle_connection(stream: TcpStream, sessions: Sender<Session>, ui: Option<PathBuf>) {
    let head = sniff(&stream);
    if head.starts_with(b"GET ") {
        let text = String::from_utf8_lossy(&head).to_ascii_lowercase();
        if text.contains("upgrade: websocket") {
            websocket_session(stream, sessions);
        } else {
            let _ = serve_static(stream, ui.as_deref());
        }
    } else {
        raw_session(stream, sessions);
    }
}

/// Peeks at what the client sent first. Raw clients may stay silent, so a
/// short timeout means "raw".
fn sniff(stream: &TcpStream) -> Vec<u8> {
    let _ = stream.set_read_timeout(Some(Duration::from_millis(300)));
    let mut buf = vec![0u8; 4096];
    let mut seen = Vec::new();
    for _ in 0..20 {
        match stream.peek(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                seen = buf[..n].to_vec();
                if !seen.starts_with(b"GET ") || seen.windows(4).any(|w| w == b"\r\n\r\n") {
                    break;
                }
                thread::sleep(Duration::from_millis(5));
            }
            Err(_) => break,
        }
    }
    let _ = stream.set_read_timeout(None);
    seen
}

fn raw_session(stream: TcpStream, sessions: Sender<Session>) {
    let (ev_tx, ev_rx) = mpsc::channel::<String>();
    let (cmd_tx, cmd_rx) = mpsc::channel();
    let Ok(reader) = stream.try_clone() else { return };
    if sessions.send(Session::new(ev_tx, cmd_rx)).is_err() {
        return;
    }
    let writer_stream = stream;
    let writer = thread::spawn(move || {
        let mut w = io::BufWriter::new(&writer_stream);
        for line in ev_rx {
            if w.write_all(line.as_bytes()).and_then(|_| w.write_all(b"\n")).and_then(|_| w.flush()).is_err() {
                break;
            }
        }
        let _ = w.flush();
        drop(w);
        let _ = writer_stream.shutdown(Shutdown::Both);
    });
    for line in BufReader::new(reader).lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(c) = Command::parse(&line) {
            if cmd_tx.send(Incoming::Command(c)).is_err() {
                break;
            }
        }
    }
    let _ = cmd_tx.send(Incoming::Closed);
    let _ = writer.join();
}

fn websocket_session(stream: TcpStream, sessions: Sender<Session>) {
    let Ok(mut ws) = tungstenite::accept(stream) else { return };
    let _ = ws.get_ref().set_read_timeout(Some(Duration::from_millis(20)));
    let (ev_tx, ev_rx) = mpsc::channel::<String>();
    let (cmd_tx, cmd_rx) = mpsc::channel();
    if sessions.send(Session::new(ev_tx, cmd_rx)).is_err() {
        return;
    }
    'outer: loop {
        loop {
            match ev_rx.try_recv() {
                Ok(line) => {
                    if ws.send(Message::Text(line)).is_err() {
                        break 'outer;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    break 'outer;
                }
            }
        }
        match ws.read() {
            Ok(Message::Text(t)) => {
                if let Some(c) = Command::parse(&t) {
                    let _ = cmd_tx.send(Incoming::Command(c));
                }
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
    }
    let _ = cmd_tx.send(Incoming::Closed);
}

const PLACEHOLDER: &str = "<!doctype html><title>graftool debugger</title>\
<p>The debugger UI is not built. Build it and pass its output directory with <code>--ui-dir</code>, \
or connect a client to the websocket on this port.</p>";

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") | Some("map") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        _ => "application/octet-stream",
    }
}

fn serve_static(mut stream: TcpStream, ui: Option<&Path>) -> io::Result<()> {
    let mut buf = [0u8; 8192];
    let n = stream.read(&mut buf)?;
    let request = String::from_utf8_lossy(&buf[..n]);
    let target = request.split_whitespace().nth(1).unwrap_or("/");
    let target = target.split(['?', '#']).next().unwrap_or("/");
    let rel = if target == "/" { "index.html" } else { target.trim_start_matches('/') };
    let safe = Path::new(rel).components().all(|c| matches!(c, Component::Normal(_)));
    let file = ui.filter(|_| safe).map(|d| d.join(rel));
    let (status, ctype, body) = match file.as_deref().map(|f| (f, std::fs::read(f))) {
        Some((f, Ok(bytes))) => ("200 OK", content_type(f), bytes),
        _ if rel == "index.html" => ("200 OK", "text/html; charset=utf-8", PLACEHOLDER.as_bytes().to_vec()),
        _ => ("404 Not Found", "text/plain", b"not found".to_vec()),
    };
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(&body)?;
    stream.flush()
}

/// Waits up to `timeout` for a session, for callers that must not block.
pub fn wait_session(server: &mut DebugServer, timeout: Duration) -> bool {
    if server.current.as_ref().is_some_and(Session::is_alive) {
        return true;
    }
    match server.sessions.recv_timeout(timeout) {
        Ok(s) => {
            server.current = Some(s);
            true
        }
        Err(RecvTimeoutError::Timeout) | Err(RecvTimeoutError::Disconnected) => false,
    }
}
