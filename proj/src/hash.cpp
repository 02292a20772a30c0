#include "hft/hft.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <set>

namespace hft {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

namespace {

void collect_params(const Expr& e, std::set<const Node*>& seen, std::string& out) {
    if (!seen.insert(e.get()).second) return;
    if (e->op == Op::Param) {
        out += ";" + e->name + "=";
        for (std::size_t i = 0; i < e->param->size(); ++i) {
            cplx v = (*e->param)[i];
            out += (i ? "," : "") + to_string(v.re, 36);
            if (v.im != 0) out += "i" + to_string(v.im, 36);
        }
    }
    for (auto& k : e->kids) collect_params(k, seen, out);
}

}  // namespace

std::string canonical_expr(const Expr& e) {
    std::string out = to_sexpr(e);
    std::set<const Node*> seen;
    collect_params(e, seen, out);
    return out;
}

}  // namespace hft
