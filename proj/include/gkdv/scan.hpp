#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gkdv/conserved.hpp"
#include "gkdv/evans.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/wave.hpp"
#include "gkdv/whitham.hpp"

namespace gkdv {

enum class Outcome { Stable, Unstable, Indeterminate, NoPeriodicOrbit, Degenerate, Error };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Stable: return "Stable";
        case Outcome::Unstable: return "Unstable";
        case Outcome::Indeterminate: return "Indeterminate";
        case Outcome::NoPeriodicOrbit: return "NoPeriodicOrbit";
        case Outcome::Degenerate: return "Degenerate";
        default: return "Error";
    }
}

struct ScanAxis {
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    double value(int i) const {
        if (count <= 1) return min;
        return min + (max - min) * double(i) / double(count - 1);
    }
};

struct PipelineFlags {
    bool conserved = true;
    bool cubic = true;
    bool whitham = false;
    bool evans = false;
};

struct Tolerances {
    double quad = 1e-12;
    double fd = 1e-7;
    double evans_radius = 1e-2;
    double classify = 1e-8;
    double degeneracy = 1e-9;
};

struct ScanConfig {
    std::string nl_tag = "kdv";
    ScanAxis a, E, c;
    PipelineFlags pipeline;
    Tolerances tol;
    int workers = 1;
    int profile_n = 512;
};

struct ScanRecord {
    double a = 0.0, E = 0.0, c = 0.0;
    Outcome outcome = Outcome::Error;
    std::optional<double> T, M, P, H;
    std::optional<double> bTMP, bTP, bMP, disc;
    std::optional<std::array<Complex, 3>> eigA;
    std::optional<Complex> c30, c21, c03;
    double timing_ms = 0.0;
    std::string message;  // error text / downgrade flags
};

/// Run the full per-point pipeline; failures are captured in the record
/// rather than thrown (a failed optional stage keeps the cubic verdict and
/// sets a flag in message).
inline ScanRecord analyze_point(const Nonlinearity& nl, double a, double E, double c,
                                const PipelineFlags& pipeline = {}, const Tolerances& tol = {},
                                int profile_n = 512) {
    ScanRecord rec;
    rec.a = a;
    rec.E = E;
    rec.c = c;
    const auto t0 = std::chrono::steady_clock::now();
    WaveOptions wopt;
    wopt.quad_tol = tol.quad;
    try {
        const WaveParams p = solve_wave(nl, a, E, c, {}, wopt);
        rec.T = p.T;
        if (pipeline.conserved || pipeline.cubic || pipeline.whitham || pipeline.evans) {
            GradientOptions gopt;
            gopt.rel_tol = tol.fd;
            gopt.wave = wopt;
            const ConservedSet cs = gradients(nl, p, gopt);
            rec.M = cs.M;
            rec.P = cs.P;
            rec.H = cs.H;
            const Brackets br = brackets(cs);
            rec.bTMP = br.TMP_aEc;
            rec.bTP = br.TP_Ec;
            rec.bMP = br.MP_aE;
            if (pipeline.cubic || pipeline.whitham || pipeline.evans) {
                const DispersionCubic dc = dispersion_cubic(br);
                rec.disc = dc.disc;
                switch (classify_modulational(dc, tol.classify)) {
                    case Verdict::Stable: rec.outcome = Outcome::Stable; break;
                    case Verdict::Unstable: rec.outcome = Outcome::Unstable; break;
                    default: rec.outcome = Outcome::Indeterminate; break;
                }
                if (pipeline.whitham) {
                    try {
                        WhithamOptions whopt;
                        whopt.grad = gopt;
                        whopt.tmp_threshold = tol.degeneracy;
                        const WhithamLinearization wl = whitham_linearization(nl, p, whopt);
                        rec.eigA = wl.eigs;
                    } catch (const Error& e) {
                        rec.message += std::string("[whitham failed: ") + e.what() + "]";
                    }
                }
                if (pipeline.evans) {
                    try {
                        const WaveProfile prof = sample_profile(nl, p, profile_n);
                        const EvansExpansion fit =
                            fit_expansion(nl, prof, tol.evans_radius);
                        rec.c30 = fit.c30;
                        rec.c21 = fit.c21;
                        rec.c03 = fit.c03;
                    } catch (const Error& e) {
                        rec.message += std::string("[evans failed: ") + e.what() + "]";
                    }
                }
            } else {
                rec.outcome = Outcome::Indeterminate;  // no classification requested
            }
        }
    } catch (const NoPeriodicOrbit& e) {
        rec.outcome = Outcome::NoPeriodicOrbit;
        rec.message = e.what();
    } catch (const DegenerateOrbit& e) {
        rec.outcome = Outcome::Degenerate;
        rec.message = e.what();
    } catch (const DegenerateIndex& e) {
        rec.outcome = Outcome::Degenerate;
        rec.message = e.what();
    } catch (const std::exception& e) {
        rec.outcome = Outcome::Error;
        rec.message = e.what();
    }
    rec.timing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Sweep the grid; grid points are independent work items over a worker
/// pool, results emitted in grid order (a outer, E middle, c inner)
/// regardless of execution order.
inline std::vector<ScanRecord> run_scan(const ScanConfig& cfg) {
    if (cfg.a.count < 1 || cfg.E.count < 1 || cfg.c.count < 1)
        throw ConfigError("scan axis count must be >= 1");
    if (cfg.a.min > cfg.a.max || cfg.E.min > cfg.E.max || cfg.c.min > cfg.c.max)
        throw ConfigError("scan axis min > max");
    if (!(cfg.pipeline.conserved || cfg.pipeline.cubic || cfg.pipeline.whitham ||
          cfg.pipeline.evans))
        throw ConfigError("at least one pipeline stage must be enabled");

    const Nonlinearity nl = nonlinearity_from_tag(cfg.nl_tag);
    const int total = cfg.a.count * cfg.E.count * cfg.c.count;
    std::vector<ScanRecord> records(total);

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= total) return;
            const int ia = idx / (cfg.E.count * cfg.c.count);
            const int ie = (idx / cfg.c.count) % cfg.E.count;
            const int ic = idx % cfg.c.count;
            records[idx] = analyze_point(nl, cfg.a.value(ia), cfg.E.value(ie), cfg.c.value(ic),
                                         cfg.pipeline, cfg.tol, cfg.profile_n);
        }
    };

    const int nworkers = std::max(1, cfg.workers);
    if (nworkers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (int i = 0; i < nworkers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return records;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : ""; }

}  // namespace detail

inline const char* scan_csv_header() {
    return "a,E,c,outcome,T,M,P,H,bTMP,bTP,bMP,disc,"
           "eigA_re1,eigA_im1,eigA_re2,eigA_im2,eigA_re3,eigA_im3,"
           "c30_re,c30_im,c21_re,c21_im,c03_re,c03_im,timing_ms";
}

inline void write_csv(std::ostream& os, const std::vector<ScanRecord>& records) {
    os << scan_csv_header() << "\n";
    for (const auto& r : records) {
        using detail::fmt17;
        using detail::opt17;
        os << fmt17(r.a) << ',' << fmt17(r.E) << ',' << fmt17(r.c) << ',' << to_string(r.outcome)
           << ',' << opt17(r.T) << ',' << opt17(r.M) << ',' << opt17(r.P) << ',' << opt17(r.H)
           << ',' << opt17(r.bTMP) << ',' << opt17(r.bTP) << ',' << opt17(r.bMP) << ','
           << opt17(r.disc) << ',';
        for (int k = 0; k < 3; ++k) {
            if (r.eigA)
                os << fmt17((*r.eigA)[k].real()) << ',' << fmt17((*r.eigA)[k].imag()) << ',';
            else
                os << ",,";
        }
        for (const auto& cv : {r.c30, r.c21, r.c03}) {
            if (cv)
                os << fmt17(cv->real()) << ',' << fmt17(cv->imag()) << ',';
            else
                os << ",,";
        }
        os << fmt17(r.timing_ms) << "\n";
    }
}

inline nlohmann::json record_to_json(const ScanRecord& r) {
    nlohmann::json j;
    j["a"] = r.a;
    j["E"] = r.E;
    j["c"] = r.c;
    j["outcome"] = to_string(r.outcome);
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("T", r.T);
    put("M", r.M);
    put("P", r.P);
    put("H", r.H);
    put("bTMP", r.bTMP);
    put("bTP", r.bTP);
    put("bMP", r.bMP);
    put("disc", r.disc);
    if (r.eigA)
        for (int k = 0; k < 3; ++k) {
            j["eigA_re" + std::to_string(k + 1)] = (*r.eigA)[k].real();
            j["eigA_im" + std::to_string(k + 1)] = (*r.eigA)[k].imag();
        }
    auto putc = [&](const std::string& key, const std::optional<Complex>& v) {
        if (v) {
            j[key + "_re"] = v->real();
            j[key + "_im"] = v->imag();
        }
    };
    putc("c30", r.c30);
    putc("c21", r.c21);
    putc("c03", r.c03);
    j["timing_ms"] = r.timing_ms;
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

inline void write_jsonl(std::ostream& os, const std::vector<ScanRecord>& records) {
    for (const auto& r : records) os << record_to_json(r).dump() << "\n";
}

}  // namespace gkdv
