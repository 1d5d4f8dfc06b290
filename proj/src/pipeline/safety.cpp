#include "poai/pipeline/safety.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "poai/common/codec.h"
#include "poai/common/error.h"
#include "poai/pipeline/expr.h"

namespace poai::pipeline {
namespace {

constexpr std::string_view kDefaultPolicy = R"(# Static vetting policy for user plugin code.
maxBytes: 256
maxTokens: 96
maxDepth: 12
allow:
  identifiers: [acc, x, step, params, min, max, abs, floor]
deny:
  - class: import
    label: import
    tokens: [import, include, require, from, using, module, load, dlopen]
  - class: filesystem
    label: filesystem
    tokens: [open, fopen, read, write, file, files, unlink, remove, rmdir, mkdir, chmod, path, fs, readfile, writefile, stdin, stdout]
  - class: process
    label: process spawn
    tokens: [system, exec, execv, execve, popen, spawn, fork, subprocess, kill, shell, os, sh, "`"]
  - class: network
    label: network
    tokens: [socket, connect, bind, listen, accept, send, recv, http, https, url, urllib, urlopen, requests, fetch, curl, wget, dns]
  - class: reflection
    label: reflection
    tokens: [eval, compile, getattr, setattr, delattr, __import__, globals, locals, vars, __class__, __dict__, __builtins__, __subclasses__, reflect, invoke]
)";

[[noreturn]] void malformed(const YAML::Node& n, const std::string& msg) {
    const auto m = n.Mark();
    throw ProtocolError(Errc::MalformedConfig, "safety policy line " + std::to_string(m.line + 1) + ": " + msg);
}

std::size_t positive(const YAML::Node& root, const char* key, std::size_t fallback) {
    const auto n = root[key];
    if (!n) return fallback;
    try {
        const auto v = n.as<long long>();
        if (v <= 0) malformed(n, std::string(key) + " must be positive");
        return static_cast<std::size_t>(v);
    } catch (const YAML::Exception&) {
        malformed(n, std::string(key) + " must be an integer");
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void addOnce(std::vector<std::string>& out, const std::string& reason) {
    if (std::find(out.begin(), out.end(), reason) == out.end()) out.push_back(reason);
}

}  // namespace

SafetyPolicy loadSafetyPolicy(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ProtocolError(Errc::MalformedConfig,
                            "safety policy line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) malformed(root, "expected a mapping");
    SafetyPolicy p;
    p.maxBytes = positive(root, "maxBytes", p.maxBytes);
    p.maxTokens = positive(root, "maxTokens", p.maxTokens);
    p.maxDepth = positive(root, "maxDepth", p.maxDepth);
    if (const auto allow = root["allow"]) {
        const auto ids = allow["identifiers"];
        if (!ids || !ids.IsSequence()) malformed(allow, "allow.identifiers must be a list");
        for (const auto& i : ids) p.allowedIdentifiers.insert(i.as<std::string>());
    }
    if (const auto deny = root["deny"]) {
        if (!deny.IsSequence()) malformed(deny, "deny must be a list");
        for (const auto& d : deny) {
            DenyClass c;
            if (!d["class"] || !d["tokens"] || !d["tokens"].IsSequence()) {
                malformed(d, "deny entries need class and tokens");
            }
            c.name = d["class"].as<std::string>();
            c.label = d["label"] ? d["label"].as<std::string>() : c.name;
            for (const auto& t : d["tokens"]) c.tokens.insert(lower(t.as<std::string>()));
            p.deny.push_back(std::move(c));
        }
    }
    return p;
}

SafetyPolicy loadSafetyPolicyFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProtocolError(Errc::MalformedConfig, "cannot read safety policy " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return loadSafetyPolicy(ss.str());
}

std::string_view defaultSafetyPolicyText() { return kDefaultPolicy; }

const SafetyPolicy& defaultSafetyPolicy() {
    static const SafetyPolicy p = loadSafetyPolicy(kDefaultPolicy);
    return p;
}

std::string Verdict::toString() const {
    switch (kind) {
        case Kind::Unchecked: return "UNCHECKED";
        case Kind::Safe: return "SAFE";
        case Kind::Rejected: break;
    }
    std::string out = "REJECTED(";
    for (std::size_t i = 0; i < reasons.size(); ++i) out += (i ? ", " : "") + reasons[i];
    return out + ")";
}

PluginCode PluginCode::fromSource(std::string source) {
    PluginCode c;
    c.codeHash = sha256(source);
    c.source = std::move(source);
    return c;
}

Bytes pluginSigningMessage(const DeedId& author, const Digest& codeHash) {
    ByteWriter w;
    w.str("poai.plugin.v1");
    w.str(author);
    w.fixed(codeHash);
    return std::move(w).take();
}

void PluginCode::sign(const DeedId& who, const KeyPair& key) {
    codeHash = sha256(source);
    author = who;
    authorKey = key.publicKey();
    signature = key.sign(pluginSigningMessage(author, codeHash));
}

Bytes PluginCode::encodeWire() const {
    ByteWriter w;
    w.str(source);
    w.fixed(codeHash);
    w.str(author);
    w.fixed(authorKey);
    w.boolean(signature.has_value());
    if (signature) w.fixed(*signature);
    return std::move(w).take();
}

PluginCode PluginCode::decodeWire(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    PluginCode c;
    c.source = r.str();
    c.codeHash = r.fixed<32>();
    c.author = r.str();
    c.authorKey = r.fixed<32>();
    if (r.boolean()) c.signature = r.fixed<64>();
    r.expectDone();
    return c;
}

Verdict safetyCheck(const PluginCode& code, const SafetyPolicy& policy) { return safetyCheck(code.source, policy); }

Verdict safetyCheck(std::string_view source, const SafetyPolicy& policy) {
    std::vector<std::string> reasons;
    const auto lexemes = lex(source);

    std::vector<std::string> denied;
    std::vector<std::string> other;
    std::size_t parenDepth = 0;
    std::size_t maxParen = 0;
    for (std::size_t i = 0; i < lexemes.size(); ++i) {
        const auto& l = lexemes[i];
        if (l.kind == LexKind::LParen) maxParen = std::max(maxParen, ++parenDepth);
        if (l.kind == LexKind::RParen && parenDepth > 0) --parenDepth;
        if (l.kind != LexKind::Ident && l.kind != LexKind::Other && l.kind != LexKind::String) continue;

        const auto key = lower(l.text);
        bool hit = false;
        for (const auto& cls : policy.deny) {
            if (cls.tokens.contains(key)) {
                addOnce(denied, cls.label);
                hit = true;
            }
        }
        if (hit) continue;
        if (l.kind == LexKind::String) {
            addOnce(other, "string literal");
        } else if (l.kind == LexKind::Other) {
            addOnce(other, "unsupported character '" + l.text + "'");
        } else {
            const bool paramName = i >= 2 && lexemes[i - 1].kind == LexKind::Dot &&
                                   lexemes[i - 2].kind == LexKind::Ident && lexemes[i - 2].text == "params";
            if (!paramName && !policy.allowedIdentifiers.contains(l.text)) {
                addOnce(other, "unknown identifier '" + l.text + "'");
            }
        }
    }
    // Deny-class hits come first and in policy order.
    for (const auto& cls : policy.deny) {
        if (std::find(denied.begin(), denied.end(), cls.label) != denied.end()) addOnce(reasons, cls.label);
    }
    if (source.size() > policy.maxBytes) reasons.emplace_back("size");
    if (lexemes.size() > policy.maxTokens) reasons.emplace_back("token count");

    std::size_t depth = maxParen;
    std::string syntax;
    try {
        depth = std::max(depth, exprDepth(*parseExpr(source)));
    } catch (const ProtocolError& e) {
        syntax = e.what();
    }
    if (depth > policy.maxDepth) reasons.emplace_back("depth");
    for (auto& o : other) reasons.push_back(std::move(o));
    if (reasons.empty() && !syntax.empty()) reasons.push_back("syntax: " + syntax);
    return reasons.empty() ? Verdict::ok() : Verdict::rejected(std::move(reasons));
}

Verdict hashSignRecheck(const PluginCode& code, const PublicKey& expectedAuthor, std::uint32_t hop) {
    const std::string at = " at hop " + std::to_string(hop);
    if (sha256(code.source) != code.codeHash) return Verdict::rejected({"digest mismatch" + at});
    if (!code.signature) return Verdict::rejected({"missing signature" + at});
    if (code.authorKey != expectedAuthor) return Verdict::rejected({"unexpected author key" + at});
    if (!verifySignature(code.authorKey, pluginSigningMessage(code.author, code.codeHash), *code.signature)) {
        return Verdict::rejected({"bad signature" + at});
    }
    return Verdict::ok();
}

}  // namespace poai::pipeline
