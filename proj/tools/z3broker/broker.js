#!/usr/bin/env node
// SMT-LIB2 broker around the WebAssembly build of Z3 (npm package "z3-solver").
//
// Loading the ~35 MB wasm module costs about a second, which is far too slow
// to pay per solver session. This broker keeps a pool of initialized wasm
// instances and serves any number of sessions over a unix domain socket. Each
// connection leases a whole instance — private memory, private worker threads
// — so sessions are isolated exactly as separate z3 processes would be. An
// earlier design shared one instance behind a serializing queue, but the
// build runs queries on a worker thread and any main-thread call into the
// module while a query is in flight (even for an unrelated context) corrupts
// it. Whole-instance leasing removes that class of bug. The z3relay
// executable connects a session's stdin/stdout to this socket.
//
// Usage: node broker.js [socket-path]
//   MINIKIND_Z3_SOCKET   socket path (default /tmp/minikind-z3-$UID.sock)
//   MINIKIND_Z3_IDLE_MS  exit after this long with no connections (default 10 min)
//   MINIKIND_Z3_POOL     max idle instances kept for reuse (default 8)

'use strict';
const net = require('net');
const fs = require('fs');
const os = require('os');

function defaultSocketPath() {
  const uid = typeof process.getuid === 'function' ? process.getuid() : 0;
  return os.tmpdir() + '/minikind-z3-' + uid + '.sock';
}

const SOCKET = process.argv[2] || process.env.MINIKIND_Z3_SOCKET || defaultSocketPath();
const IDLE_MS = parseInt(process.env.MINIKIND_Z3_IDLE_MS || '600000', 10);
const POOL_MAX = parseInt(process.env.MINIKIND_Z3_POOL || '8', 10);
const TRACE = process.env.MINIKIND_Z3_LOG || '';
let traceSeq = 0;
function trace(conn, kind, text) {
  if (!TRACE) return;
  try {
    fs.appendFileSync(TRACE, JSON.stringify({ n: traceSeq++, conn, kind, text }) + '\n');
  } catch (e) {}
}

// Splits a byte stream into complete top-level SMT-LIB2 forms. Understands
// parens, string literals ("" escape), |quoted symbols| and ; comments.
class FormSplitter {
  constructor() {
    this.buf = '';
    this.depth = 0;
    this.pos = 0;      // scan position within buf
    this.start = 0;    // start of current form
    this.mode = 'top'; // top | string | qsym | comment
  }
  // Feed a chunk, return array of complete forms.
  feed(chunk) {
    this.buf += chunk;
    const out = [];
    while (this.pos < this.buf.length) {
      const c = this.buf[this.pos];
      if (this.mode === 'comment') {
        if (c === '\n') this.mode = 'top';
      } else if (this.mode === 'string') {
        if (c === '"') {
          // "" is an escaped quote
          if (this.buf[this.pos + 1] === '"') this.pos++;
          else this.mode = 'top';
        }
      } else if (this.mode === 'qsym') {
        if (c === '|') this.mode = 'top';
      } else {
        if (c === ';') {
          this.mode = 'comment';
        } else if (c === '"') {
          this.mode = 'string';
        } else if (c === '|') {
          this.mode = 'qsym';
        } else if (c === '(') {
          if (this.depth === 0) this.start = this.pos;
          this.depth++;
        } else if (c === ')') {
          this.depth--;
          if (this.depth === 0) {
            out.push(this.buf.slice(this.start, this.pos + 1));
            this.start = this.pos + 1;
          } else if (this.depth < 0) {
            this.depth = 0; // tolerate stray ')'
          }
        }
      }
      this.pos++;
    }
    if (this.depth === 0 && this.mode !== 'string' && this.mode !== 'qsym') {
      this.buf = '';
      this.pos = 0;
      this.start = 0;
    } else if (this.start > 0) {
      this.buf = this.buf.slice(this.start);
      this.pos -= this.start;
      this.start = 0;
    }
    return out;
  }
}

function loadZ3() {
  const candidates = ['z3-solver', '/usr/lib/node_modules/z3-solver',
                      '/usr/local/lib/node_modules/z3-solver'];
  for (const c of candidates) {
    try { return { pkg: require(c), base: c }; } catch (e) {}
  }
  throw new Error("npm package 'z3-solver' not found (install with: npm install -g z3-solver)");
}

async function main() {
  const { pkg, base } = loadZ3();
  const { init } = pkg;
  let killThreads = null;
  try { killThreads = require(base + '/build/kill-threads').killThreads; } catch (e) {}

  const idlePool = [];
  async function lease() {
    const inst = idlePool.pop();
    if (inst) return inst;
    return await init();
  }

  // The packaged eval passes its input as a ccall 'string', which lives in a
  // transient stack slot that is gone by the time the solver thread reads it;
  // under load the slot gets reused mid-query and the solver parses garbage.
  // Marshal through malloc instead and free only after the call resolves.
  async function evalSmt(inst, ctx, text) {
    const M = inst.em;
    const bytes = Buffer.from(text + '\0', 'utf8');
    const ptr = M._malloc(bytes.length);
    M.HEAPU8.set(bytes, ptr);
    try {
      return await M.async_call(() =>
        M.ccall('async_Z3_eval_smtlib2_string', 'void', ['number', 'number'], [ctx, ptr]));
    } finally {
      M._free(ptr);
    }
  }
  function release(inst, poisoned) {
    if (!poisoned && idlePool.length < POOL_MAX) {
      idlePool.push(inst);
      return;
    }
    // Dropping an instance: its worker threads would otherwise keep running.
    if (killThreads) {
      try { killThreads(inst.em); } catch (e) {}
    }
  }

  let liveConnections = 0;
  let lastActivity = Date.now();

  // Prime the pool so the first sessions skip instance startup.
  lease().then((i) => release(i, false)).catch(() => {});

  let connSeq = 0;
  // allowHalfOpen: the relay may close its write side (stdin EOF) while
  // responses for queued commands are still being computed.
  const server = net.createServer({ allowHalfOpen: true }, (sock) => {
    liveConnections++;
    lastActivity = Date.now();
    const connId = ++connSeq;
    const splitter = new FormSplitter();
    let inst = null;
    let ctx = null;
    let poisoned = false;
    let closed = false;

    // Commands of one connection run in order on its private instance. The
    // chain absorbs rejections so one bad link cannot wedge the ones behind.
    let chain = Promise.resolve();
    function enqueue(fn) {
      chain = chain.then(fn).catch((e) => trace(connId, 'chain-error', String(e)));
    }

    enqueue(async () => {
      if (closed) return;
      inst = await lease();
      const cfg = inst.Z3.mk_config();
      ctx = inst.Z3.mk_context(cfg);
      inst.Z3.del_config(cfg);
    });

    sock.on('data', (data) => {
      lastActivity = Date.now();
      trace(connId, 'chunk', data.toString('utf8'));
      const forms = splitter.feed(data.toString('utf8'));
      for (const form of forms) {
        enqueue(async () => {
          if (closed || ctx === null) return;
          trace(connId, 'form', form);
          if (/^\(\s*exit\s*\)$/.test(form)) {
            sock.write('success\n');
            sock.end();
            return;
          }
          let out;
          try {
            out = await evalSmt(inst, ctx, form);
          } catch (e) {
            poisoned = true;
            out = '(error "' + String(e).replace(/"/g, "'") + '")';
          }
          if (closed) return;
          if (out.length === 0 || out[out.length - 1] !== '\n') out += '\n';
          trace(connId, 'resp', out);
          try { sock.write(out); } catch (e) {}
        });
      }
    });
    const cleanup = () => {
      if (closed) return;
      closed = true;
      liveConnections--;
      lastActivity = Date.now();
      enqueue(() => {
        if (inst === null) return;
        if (ctx !== null) {
          try { inst.Z3.del_context(ctx); } catch (e) { poisoned = true; }
        }
        ctx = null;
        release(inst, poisoned);
        inst = null;
      });
    };
    // Client closed its write side: finish pending work, then close ours.
    sock.on('end', () => {
      enqueue(() => { if (!closed) sock.end(); });
    });
    sock.on('close', cleanup);
    sock.on('error', cleanup);
  });

  server.on('error', (err) => {
    if (err.code === 'EADDRINUSE') {
      // Another broker may already be serving; if so, quietly defer to it.
      const probe = net.connect(SOCKET, () => { probe.destroy(); process.exit(0); });
      probe.on('error', () => {
        try { fs.unlinkSync(SOCKET); } catch (e) {}
        server.listen(SOCKET);
      });
    } else {
      console.error('broker:', err.message);
      process.exit(1);
    }
  });

  server.listen(SOCKET, () => {
    // Stamp readiness for launchers that poll.
    if (process.send) process.send('ready');
  });

  setInterval(() => {
    if (liveConnections === 0 && Date.now() - lastActivity > IDLE_MS) {
      try { fs.unlinkSync(SOCKET); } catch (e) {}
      process.exit(0);
    }
  }, 5000).unref();
  setInterval(() => {}, 1 << 30); // keep event loop alive
}

main().catch((e) => {
  console.error('broker failed to start:', e);
  process.exit(1);
});
