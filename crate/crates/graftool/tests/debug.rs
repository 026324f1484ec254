use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};

use graftool::debug::{Command, DebugServer, ScriptedClient};
use graftool::shell::{Shell, ShellOptions};
use graftool_core::{write_native, AttributeValue};
use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/models")
}

/// One looping edge object on node `a`, one ordinary edge a -> b.
fn stage() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let m = models();
    for f in ["graph.ecore", "result.ecore", "Emitter.gri"] {
        std::fs::copy(m.join(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(
        dir.path().join("graph.xmi"),
        r#"<graph:Graph xmlns:graph="http://graph">
  <nodes name="a"/><nodes name="b"/>
  <edges src="//@nodes.0" trg="//@nodes.0"/>
  <edges src="//@nodes.0" trg="//@nodes.1"/>
</graph:Graph>"#,
    )
    .unwrap();
    std::fs::copy(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/count/Count.grg"),
        dir.path().join("Count.grg"),
    )
    .unwrap();
    let text = std::fs::read_to_string(dir.path().join("Count.grg")).unwrap();
    std::fs::write(dir.path().join("Count.grg"), text.replace("../models/Emitter.gri", "Emitter.gri")).unwrap();
    dir
}

const SCRIPT: &str = "import graph.ecore result.ecore graph.xmi Count.grg
xgrs (r)=createIntResult
debug xgrs [countLoopingEdge(r)]
";

/// Runs SCRIPT with a scripted client answering by `policy`; returns the
/// event log, the graph before the debug run and after it, and the counter.
fn debug_run(policy: impl FnMut(&Value) -> Command + Send + 'static) -> (Vec<Value>, String, String, i64) {
    let dir = stage();
    let origin = dir.path().join("s.grs");
    let server = DebugServer::start(0, None).unwrap();
    let client = ScriptedClient::connect(server.local_addr(), policy).unwrap();
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.attach_debugger(server);
    let mut lines = SCRIPT.lines();
    let setup: Vec<&str> = lines.by_ref().take(2).collect();
    shell.run_text(&setup.join("\n"), &origin).unwrap();
    let before = write_native(shell.graph().unwrap());
    shell.run_text(lines.next().unwrap(), &origin).unwrap();
    let g = shell.graph().unwrap();
    let after = write_native(g);
    let r = g.nodes().find(|&n| g.type_name(n) == Some("result_IntResult")).unwrap();
    let AttributeValue::Int(count) = *g.get_attr(r, "_result").unwrap() else { panic!() };
    drop(shell);
    (client.finish().unwrap(), before, after, count)
}

fn kinds(log: &[Value]) -> Vec<&str> {
    log.iter().map(|e| e["type"].as_str().unwrap()).collect()
}

#[test]
fn stepping_reports_one_loop_match_with_pattern_names() {
    let (log, _, _, count) = debug_run(|_| Command::Step);
    assert_eq!(count, 1);
    assert_eq!(
        kinds(&log),
        ["SequenceStarted", "GraphSnapshot", "MatchFound", "PreApply", "PostApply", "SequenceFinished"]
    );
    let steps: Vec<u64> = log.iter().map(|e| e["step"].as_u64().unwrap()).collect();
    assert_eq!(steps, (0..6).collect::<Vec<_>>());
    let m = &log[2];
    assert_eq!(m["rule"], "countLoopingEdge");
    assert_eq!(m["suspended"], true);
    let names: Vec<&str> = m["bindings"].as_array().unwrap().iter().map(|b| b["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"e") && names.contains(&"n"), "{names:?}");
    // bound elements exist in the snapshot sent before
    let snapshot = &log[1];
    let snapshot_ids: Vec<u64> = ["nodes", "edges"]
        .iter()
        .flat_map(|k| snapshot[*k].as_array().unwrap())
        .map(|x| x["id"].as_u64().unwrap())
        .collect();
    for b in m["bindings"].as_array().unwrap() {
        assert!(snapshot_ids.contains(&b["id"].as_u64().unwrap()));
    }
    assert_eq!(log[5]["result"], true);
}

#[test]
fn continue_matches_the_plain_run() {
    let (log, _, debugged, _) = debug_run(|_| Command::Continue);
    assert_eq!(log.last().unwrap()["result"], true);
    // only the first suspension waits
    assert_eq!(log.iter().filter(|e| e["suspended"] == true).count(), 1);

    let dir = stage();
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.run_text(&SCRIPT.replace("debug xgrs", "xgrs"), &dir.path().join("s.grs")).unwrap();
    assert_eq!(write_native(shell.graph().unwrap()), debugged);
}

#[test]
fn abort_at_first_match_rewrites_nothing() {
    let (log, before, after, count) = debug_run(|_| Command::Abort);
    assert_eq!(kinds(&log), ["SequenceStarted", "GraphSnapshot", "MatchFound", "SequenceFinished"]);
    assert_eq!(log[3]["result"], false);
    assert_eq!(count, 0);
    assert_eq!(before, after);
}

#[test]
fn snapshot_command_resends_the_graph_while_suspended() {
    let mut asked = false;
    let (log, _, _, _) = debug_run(move |_| {
        if asked {
            Command::Continue
        } else {
            asked = true;
            Command::Snapshot
        }
    });
    assert_eq!(kinds(&log).iter().filter(|k| **k == "GraphSnapshot").count(), 2);
    assert_eq!(log[3]["type"], "GraphSnapshot");
    assert_eq!(log[3]["suspended"], true);
    assert_eq!(log.last().unwrap()["result"], true);
}

#[test]
fn closed_transport_counts_as_abort() {
    let dir = stage();
    let origin = dir.path().join("s.grs");
    let server = DebugServer::start(0, None).unwrap();
    let mut raw = TcpStream::connect(server.local_addr()).unwrap();
    raw.write_all(b"hello\n").unwrap();
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.attach_debugger(server);
    shell.run_text("import graph.ecore result.ecore graph.xmi Count.grg\nxgrs (r)=createIntResult", &origin).unwrap();
    let before = write_native(shell.graph().unwrap());
    // read the first records, then hang up while suspended
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let mut byte = [0u8; 1];
        while buf.iter().filter(|&&b| b == b'\n').count() < 3 && raw.read(&mut byte).unwrap() == 1 {
            buf.push(byte[0]);
        }
        drop(raw);
    });
    shell.run_text("debug xgrs [countLoopingEdge(r)]", &origin).unwrap();
    reader.join().unwrap();
    assert_eq!(write_native(shell.graph().unwrap()), before);
}

#[test]
fn websocket_clients_get_the_same_records() {
    let dir = stage();
    let origin = dir.path().join("s.grs");
    let server = DebugServer::start(0, None).unwrap();
    let url = format!("ws://{}/", server.local_addr());
    let client = std::thread::spawn(move || {
        let (mut ws, _) = tungstenite::connect(url).unwrap();
        let mut log = Vec::new();
        while let Ok(msg) = ws.read() {
            let tungstenite::Message::Text(t) = msg else { continue };
            let v: Value = serde_json::from_str(&t).unwrap();
            if v["suspended"] == true {
                ws.send(tungstenite::Message::Text("{\"command\":\"step\"}".into())).unwrap();
            }
            log.push(v);
        }
        log
    });
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.attach_debugger(server);
    shell.run_text(SCRIPT, &origin).unwrap();
    drop(shell);
    let log = client.join().unwrap();
    assert_eq!(
        kinds(&log),
        ["SequenceStarted", "GraphSnapshot", "MatchFound", "PreApply", "PostApply", "SequenceFinished"]
    );
}

fn http_get(addr: std::net::SocketAddr, path: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\n\r\n").unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn static_assets_are_served_from_the_ui_dir() {
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<p>viewer</p>").unwrap();
    std::fs::write(ui.path().join("app.js"), "let x = 1;").unwrap();
    let server = DebugServer::start(0, Some(ui.path().to_path_buf())).unwrap();
    let addr = server.local_addr();
    let index = http_get(addr, "/");
    assert!(index.starts_with("HTTP/1.1 200") && index.ends_with("<p>viewer</p>"), "{index}");
    assert!(http_get(addr, "/app.js").contains("Content-Type: text/javascript"));
    assert!(http_get(addr, "/../Cargo.toml").starts_with("HTTP/1.1 404"));
    assert!(http_get(addr, "/missing.css").starts_with("HTTP/1.1 404"));

    let bare = DebugServer::start(0, None).unwrap();
    assert!(http_get(bare.local_addr(), "/").contains("not built"));
}

#[test]
fn show_graph_pushes_a_snapshot_to_an_attached_client() {
    let dir = stage();
    let server = DebugServer::start(0, None).unwrap();
    let client = ScriptedClient::connect(server.local_addr(), |_| Command::Continue).unwrap();
    let (mut shell, _) = Shell::captured(ShellOptions::default());
    shell.attach_debugger(server);
    // give the server a moment to register the connection
    assert!(graftool::debug::server::wait_session(shell.debugger().unwrap(), std::time::Duration::from_secs(5)));
    shell
        .run_text(
            "import graph.ecore result.ecore graph.xmi Count.grg\ndump set node graph_Node color red\nshow graph",
            &dir.path().join("s.grs"),
        )
        .unwrap();
    drop(shell);
    let log = client.finish().unwrap();
    assert_eq!(kinds(&log), ["GraphSnapshot"]);
    let node = log[0]["nodes"].as_array().unwrap().iter().find(|n| n["type"] == "graph_Node").unwrap();
    assert_eq!(node["style"]["color"], "red");
    assert_eq!(node["attrs"]["_name"], "a");
    assert!(dir.path().join("graph1.dot").is_file());
}
