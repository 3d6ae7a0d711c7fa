use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use expertfind_core::corpus::write_corpus;
use expertfind_testkit::fixtures::{toy_articles, toy_embeddings, toy_query};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expertfind"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    embeddings: PathBuf,
    index: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.jsonl");
        write_corpus(&toy_articles(), File::create(&corpus).unwrap()).unwrap();
        let embeddings = dir.path().join("vectors.txt");
        toy_embeddings()
            .write(File::create(&embeddings).unwrap())
            .unwrap();
        let index = dir.path().join("index.json");
        let out = run(&[
            "build-index",
            "--corpus",
            s(&corpus),
            "--embeddings",
            s(&embeddings),
            "--out",
            s(&index),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        Self {
            _dir: dir,
            corpus,
            embeddings,
            index,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self._dir.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_index_reports_counts_and_is_deterministic() {
    let f = Fixture::new();
    let again = f.path("again.json");
    let out = run(&[
        "build-index",
        "--corpus",
        s(&f.corpus),
        "--embeddings",
        s(&f.embeddings),
        "--regime",
        "both",
        "--out",
        s(&again),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("documents: 3\n"), "{text}");
    assert!(text.contains("authors: 6\n"), "{text}");
    assert_eq!(
        std::fs::read(&f.index).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn wmd_without_embeddings_is_refused() {
    let f = Fixture::new();
    let out = run(&[
        "build-index",
        "--corpus",
        s(&f.corpus),
        "--regime",
        "wmd",
        "--out",
        s(&f.path("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("embeddings required"));
}

#[test]
fn bad_corpus_is_a_data_error() {
    let f = Fixture::new();
    let bad = f.path("bad.jsonl");
    std::fs::write(&bad, "{not json}\n").unwrap();
    let out = run(&[
        "build-index",
        "--corpus",
        s(&bad),
        "--strict",
        "--out",
        s(&f.path("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "build-index",
        "--corpus",
        s(&f.path("missing.jsonl")),
        "--out",
        s(&f.path("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.jsonl"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["query", "--index"]).status.code(), Some(1));
    assert_eq!(
        run(&["query", "--index", "x", "--fusion", "borda"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn fixture_similarities_rr() {
    let f = Fixture::new();
    let out = run(&[
        "query",
        "--index",
        s(&f.index),
        "--similarities",
        "0.2,0.9,0.5",
        "--fusion",
        "rr",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows: Vec<(String, String)> = stdout(&out)
        .lines()
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            (cols[1].to_owned(), cols[2].to_owned())
        })
        .collect();
    let expected = [
        ("6", "1.5000"),
        ("3", "1.3333"),
        ("1", "1.0000"),
        ("2", "1.0000"),
        ("4", "0.3333"),
        ("5", "0.3333"),
    ];
    assert_eq!(rows.len(), 6);
    for (row, (id, score)) in rows.iter().zip(expected) {
        assert_eq!((row.0.as_str(), row.1.as_str()), (id, score));
    }

    let out = run(&[
        "query",
        "--index",
        s(&f.index),
        "--similarities",
        "0.2,0.9,0.5",
        "--top",
        "1",
    ]);
    assert_eq!(stdout(&out).lines().count(), 1);

    let out = run(&["query", "--index", s(&f.index), "--similarities", "0.2,0.9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fixture_similarities_bayes_values() {
    let f = Fixture::new();
    let out = run(&[
        "query",
        "--index",
        s(&f.index),
        "--similarities",
        "0.2,0.9,0.5",
        "--fusion",
        "bayes",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let score = |id: &str| {
        v["authors"]
            .as_array()
            .unwrap()
            .iter()
            .find(|a| a["author_id"] == id)
            .unwrap()["score"]
            .as_f64()
            .unwrap()
    };
    assert!((score("6") - 0.7 / 6.0).abs() < 1e-9);
    assert!((score("3") - 0.55 / 6.0).abs() < 1e-9);
}

#[test]
fn text_query_json_is_byte_stable() {
    let f = Fixture::new();
    let (title, abs) = toy_query();
    for regime in ["tfidf-cosine", "wmd"] {
        let args = [
            "query",
            "--index",
            s(&f.index),
            "--embeddings",
            s(&f.embeddings),
            "--regime",
            regime,
            "--title",
            title,
            "--abstract",
            abs,
            "--json",
        ];
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["authors"][0]["author_id"], "6", "{regime}");
        assert_eq!(v["regime"], regime);
    }
}

#[test]
fn query_errors() {
    let f = Fixture::new();
    let out = run(&[
        "query",
        "--index",
        s(&f.index),
        "--title",
        "",
        "--abstract",
        " ",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty"));
    // wmd needs the embeddings at query time as well.
    let out = run(&[
        "query",
        "--index",
        s(&f.index),
        "--regime",
        "wmd",
        "--title",
        "graphs",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "query",
        "--index",
        s(&f.path("nope.json")),
        "--title",
        "graphs",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.json"));
}

#[test]
fn eval_micro_fixture() {
    let f = Fixture::new();
    let queries = f.path("eval.jsonl");
    let (title, abs) = toy_query();
    let lines = [
        serde_json::json!({"title": title, "abstract": abs, "relevant": ["6"]}),
        serde_json::json!({"title": title, "abstract": abs, "relevant": ["2"]}),
        serde_json::json!({"title": title, "abstract": abs, "relevant": ["ghost"]}),
    ];
    let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(&queries, body).unwrap();
    let out = run(&[
        "eval",
        "--index",
        s(&f.index),
        "--regime",
        "tfidf-cosine",
        "--queries",
        s(&queries),
        "--metric",
        "mrr",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Ranks 1 and 4: (1 + 0.25) / 2.
    assert!((v["value"].as_f64().unwrap() - 0.625).abs() < 1e-12, "{v}");
    assert_eq!(v["evaluated"], 2);
    assert!(stderr(&out).contains("record 3"));

    let out = run(&[
        "eval",
        "--index",
        s(&f.index),
        "--regime",
        "tfidf-cosine",
        "--queries",
        s(&queries),
        "--metric",
        "p@2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("p@2 0.2500"), "{}", stdout(&out));
}

#[test]
fn serve_startup_failures() {
    let f = Fixture::new();
    let config = f.path("service.toml");
    std::fs::write(&config, "index = \"does-not-exist.json\"\n").unwrap();
    let out = run(&["serve", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("does-not-exist.json"));

    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port();
    std::fs::write(
        &config,
        format!("index = {:?}\nlisten = \"127.0.0.1:{port}\"\n", s(&f.index)),
    )
    .unwrap();
    let out = run(&["serve", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    use std::io::{Read, Write};
    let mut stream = std::net::TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

#[test]
fn serve_answers_healthz() {
    let f = Fixture::new();
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let config = f.path("service.toml");
    std::fs::write(
        &config,
        format!(
            "index = {:?}\nembeddings = {:?}\nlisten = \"127.0.0.1:{port}\"\nfeedback_log = \"verdicts.jsonl\"\n",
            s(&f.index),
            s(&f.embeddings)
        ),
    )
    .unwrap();
    let mut child = bin()
        .args(["serve", "--config", s(&config)])
        .spawn()
        .unwrap();
    let mut body = None;
    for _ in 0..100 {
        match http_get(port, "/healthz") {
            Some(r) if r.starts_with("HTTP/1.1 200") => {
                body = Some(r);
                break;
            }
            _ => std::thread::sleep(std::time::Duration::from_millis(50)),
        }
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let body = body.expect("healthz never answered 200");
    assert!(body.contains("\"index_docs\":3"), "{body}");
    assert!(body.contains("\"index_authors\":6"), "{body}");
    assert!(f.path("verdicts.jsonl").exists());
}
