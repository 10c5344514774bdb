// Copyright 2026 The tinv Authors
// SPDX-License-Identifier: Apache-2.0

#include "tinv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "tinv/digest.hpp"
#include "tinv/error.hpp"

namespace tinv {

namespace {

constexpr std::string_view kFaultNames[] = {"TP_DIVERGENCE", "MISSING_ZERO_GRAD", "FROZEN_OPTIMIZER",
                                            "DUPLICATE_SEED", "OUTPUT_TRUNCATION", "DDP_DESYNC"};

const std::set<std::string> kScriptSteps = {"zero_grad", "forward", "backward", "step"};

std::string hex_of(const std::string& key) { return sha256_hex(key).substr(0, kDigestHexLength); }

// Builds the record stream of one process on a virtual clock.
class Emitter {
 public:
  Emitter(std::int64_t pid, MetaVars base) : pid_(pid), base_(std::move(base)) {}

  void set_step(std::int64_t step, std::int64_t epoch, const std::string& stage) {
    base_["step"] = Value::integer(step);
    base_["epoch"] = Value::integer(epoch);
    base_["stage"] = Value::string(stage);
  }

  void enter(const std::string& func, std::vector<Value> args) {
    TraceRecord r = make(RecordKind::FuncEntry);
    r.func = func;
    r.args = std::move(args);
    records_.push_back(std::move(r));
  }

  void leave(const std::string& func, Value ret = Value::none()) {
    TraceRecord r = make(RecordKind::FuncExit);
    r.func = func;
    r.ret = std::move(ret);
    records_.push_back(std::move(r));
  }

  void state(const std::string& name, const std::string& attr, Value v) {
    TraceRecord r = make(RecordKind::VarState);
    r.var_type = std::string(kParameterType);
    r.var_id = "rank" + std::to_string(pid_) + "/" + name;
    r.attr = attr;
    r.value = std::move(v);
    records_.push_back(std::move(r));
  }

  std::vector<TraceRecord> take() { return std::move(records_); }

 private:
  TraceRecord make(RecordKind kind) {
    TraceRecord r;
    r.kind = kind;
    clock_ += 1000;
    r.ts = clock_;
    r.pid = pid_;
    r.tid = 0;
    r.meta = base_;
    return r;
  }

  std::int64_t pid_;
  MetaVars base_;
  std::int64_t clock_ = 0;
  std::vector<TraceRecord> records_;
};

struct Param {
  std::string name;
  bool replicated;
  std::vector<std::int64_t> shape;
};

}  // namespace

std::string_view to_string(FaultKind k) { return kFaultNames[static_cast<int>(k)]; }

FaultKind fault_kind_from_string(std::string_view s) {
  for (int i = 0; i < 6; ++i) {
    if (kFaultNames[i] == s) return static_cast<FaultKind>(i);
  }
  throw InvalidConfig("unknown fault kind " + std::string(s));
}

FaultSpec parse_fault(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) throw InvalidConfig("fault must look like KIND@STEP: " + std::string(text));
  FaultSpec f;
  f.kind = fault_kind_from_string(text.substr(0, at));
  try {
    f.inject_step = std::stoll(std::string(text.substr(at + 1)));
  } catch (const std::exception&) {
    throw InvalidConfig("bad fault step in " + std::string(text));
  }
  return f;
}

void RunConfig::validate() const {
  if (dp_ranks < 1 || tp_ranks < 1) throw InvalidConfig("dp and tp must be at least 1");
  if (n_params < 1) throw InvalidConfig("need at least one parameter");
  if (n_steps < 1) throw InvalidConfig("need at least one step");
  if (!(replicated_fraction >= 0.0 && replicated_fraction <= 1.0)) {
    throw InvalidConfig("replicated_fraction must lie in [0, 1]");
  }
  if (batch < 1 || seq_len < 1 || hidden < 1 || steps_per_epoch < 1) throw InvalidConfig("sizes must be positive");
  for (const auto& s : api_script) {
    if (!kScriptSteps.count(s)) throw InvalidConfig("unknown api_script entry " + s);
  }
  if (fault && (fault->inject_step < 1 || fault->inject_step > n_steps)) {
    throw InvalidConfig("inject_step must fall within 1.." + std::to_string(n_steps));
  }
}

json RunConfig::to_json() const {
  json j = {{"dp", dp_ranks},
            {"tp", tp_ranks},
            {"params", n_params},
            {"replicated_fraction", replicated_fraction},
            {"steps", n_steps},
            {"api_script", api_script},
            {"seed", seed},
            {"batch", batch},
            {"seq_len", seq_len},
            {"hidden", hidden},
            {"steps_per_epoch", steps_per_epoch},
            {"run_id", run_id.empty() ? "run-" + std::to_string(seed) : run_id},
            {"schema", kSchemaVersion}};
  if (fault) {
    j["fault"] = {{"kind", std::string(to_string(fault->kind))}, {"inject_step", fault->inject_step}};
  } else {
    j["fault"] = nullptr;
  }
  return j;
}

std::vector<bool> replicated_layout(const RunConfig& cfg) {
  const int n = cfg.n_params;
  const int reps = static_cast<int>(std::lround(cfg.replicated_fraction * n));
  std::vector<bool> layout(static_cast<std::size_t>(n), false);
  // Spread replicated params evenly through the model.
  for (int k = 0; k < reps; ++k) layout[static_cast<std::size_t>((static_cast<long>(k) * n) / reps)] = true;
  return layout;
}

Run generate(const RunConfig& cfg) {
  cfg.validate();
  const auto layout = replicated_layout(cfg);
  std::vector<Param> params;
  for (int i = 0; i < cfg.n_params; ++i) {
    Param p;
    p.replicated = layout[static_cast<std::size_t>(i)];
    p.name = "layers." + std::to_string(i) + (p.replicated ? ".input_layernorm.weight" : ".attention.dense.weight");
    if (p.replicated) {
      p.shape = {cfg.hidden};
    } else {
      p.shape = {std::max(1, cfg.hidden / cfg.tp_ranks), cfg.hidden};
    }
    params.push_back(std::move(p));
  }

  const std::string seed = std::to_string(cfg.seed);
  const auto fault_at = [&](FaultKind k, std::int64_t s) {
    return cfg.fault && cfg.fault->kind == k && s >= cfg.fault->inject_step;
  };
  const auto fault_now = [&](FaultKind k, std::int64_t s) {
    return cfg.fault && cfg.fault->kind == k && s == cfg.fault->inject_step;
  };

  Run run;
  run.id = cfg.run_id.empty() ? "run-" + seed : cfg.run_id;
  const int world = cfg.dp_ranks * cfg.tp_ranks;
  for (int pid = 0; pid < world; ++pid) {
    const int dp_rank = pid / cfg.tp_ranks;
    const int tp_rank = pid % cfg.tp_ranks;
    Emitter out(pid, {{"TP_RANK", Value::integer(tp_rank)}, {"DP_RANK", Value::integer(dp_rank)}});
    const auto group = [&](const Param& p) { return p.replicated ? std::string("rep") : "tp" + std::to_string(tp_rank); };

    std::vector<std::string> data(params.size());
    std::vector<std::optional<std::string>> grad(params.size());

    out.set_step(0, 0, "init");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      data[i] = hex_of("init/" + seed + "/" + p.name + "/" + group(p));
      out.state(p.name, "tensor_model_parallel", Value::boolean(!p.replicated));
      out.state(p.name, "is_cuda", Value::boolean(true));
      out.state(p.name, "requires_grad", Value::boolean(true));
      out.state(p.name, "data", Value::digest(data[i], p.shape, "float32"));
      out.state(p.name, "grad", Value::none());
    }

    for (std::int64_t s = 1; s <= cfg.n_steps; ++s) {
      out.set_step(s, s / cfg.steps_per_epoch, "train");
      const std::string step = std::to_string(s);

      const auto worker_seed = fault_at(FaultKind::DuplicateSeed, s)
                                   ? mix_hash("seed/" + seed, std::vector<std::int64_t>{s})
                                   : mix_hash("seed/" + seed, std::vector<std::int64_t>{s, pid});
      out.enter("torch.utils.data.DataLoader.worker_init_fn",
                {Value::integer(0), Value::integer(static_cast<std::int64_t>(worker_seed >> 2))});
      out.leave("torch.utils.data.DataLoader.worker_init_fn");

      const std::vector<std::int64_t> raw_shape{cfg.batch, cfg.seq_len};
      const Value raw =
          Value::digest(hex_of("batch/" + seed + "/" + step + "/" + std::to_string(dp_rank)), raw_shape, "int64");
      const std::int64_t rows = fault_at(FaultKind::OutputTruncation, s) ? 1 : cfg.batch;
      const Value ids = Value::digest(hex_of("ids/" + raw.as_string() + "/" + std::to_string(rows)),
                                      {rows, cfg.seq_len}, "int64");
      out.enter("transformers.ProcessorMixin.__call__", {raw});
      out.leave("transformers.ProcessorMixin.__call__", ids);

      for (const auto& phase : cfg.api_script) {
        if (phase == "zero_grad") {
          if (fault_at(FaultKind::MissingZeroGrad, s)) continue;
          out.enter("torch.optim.Optimizer.zero_grad", {Value::boolean(true)});
          for (std::size_t i = 0; i < params.size(); ++i) {
            grad[i].reset();
            out.state(params[i].name, "grad", Value::none());
          }
          out.leave("torch.optim.Optimizer.zero_grad");
        } else if (phase == "forward") {
          const std::vector<std::int64_t> act_shape{rows, cfg.seq_len, cfg.hidden};
          const Value hidden = Value::digest(hex_of("embed/" + ids.as_string()), act_shape, "float32");
          const Value normed = Value::digest(hex_of("norm/" + hidden.as_string()), act_shape, "float32");
          const Value projected = Value::digest(hex_of("proj/" + normed.as_string()), act_shape, "float32");
          out.enter("torch.nn.Module.forward", {ids});
          out.enter("torch.nn.functional.layer_norm", {hidden});
          out.leave("torch.nn.functional.layer_norm", normed);
          out.enter("torch.nn.functional.linear", {normed});
          out.leave("torch.nn.functional.linear", projected);
          out.leave("torch.nn.Module.forward", projected);
        } else if (phase == "backward") {
          const Value loss = Value::digest(hex_of("loss/" + seed + "/" + step + "/" + std::to_string(dp_rank)), {},
                                           "float32");
          out.enter("torch.Tensor.backward", {loss});
          for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& p = params[i];
            grad[i] = hex_of("grad/" + seed + "/" + step + "/" + p.name + "/" + group(p) + "/" + data[i] + "/" +
                             grad[i].value_or("-"));
            out.state(p.name, "grad", Value::digest(*grad[i], p.shape, "float32"));
          }
          out.leave("torch.Tensor.backward");
        } else if (phase == "step") {
          out.enter("torch.optim.Optimizer.step", {});
          if (!fault_at(FaultKind::FrozenOptimizer, s)) {
            out.enter("torch.optim.adamw.adamw", {Value::real(0.001)});
            out.enter("torch._foreach_add_", {Value::integer(static_cast<std::int64_t>(params.size()))});
            out.leave("torch._foreach_add_");
            for (std::size_t i = 0; i < params.size(); ++i) {
              const auto& p = params[i];
              std::string key = "data/" + seed + "/" + step + "/" + p.name + "/" + group(p) + "/" + data[i] + "/" +
                                grad[i].value_or("-");
              if (fault_now(FaultKind::TpDivergence, s) && p.replicated && tp_rank > 0) {
                key += "/clip-only-on-rank0/" + std::to_string(tp_rank);
              }
              if (fault_now(FaultKind::DdpDesync, s) && dp_rank > 0) key += "/desync/" + std::to_string(dp_rank);
              data[i] = hex_of(key);
              out.state(p.name, "data", Value::digest(data[i], p.shape, "float32"));
            }
            out.leave("torch.optim.adamw.adamw");
          }
          out.leave("torch.optim.Optimizer.step");
        }
      }
    }
    ProcessTrace proc;
    proc.pid = pid;
    proc.file = "trace_" + std::to_string(pid) + ".ndjson";
    proc.records = out.take();
    run.processes.push_back(std::move(proc));
  }
  return run;
}

void write_generated(const Run& run, const RunConfig& cfg, const std::filesystem::path& dir) {
  write_run(run, dir);
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) throw Error("cannot write " + (dir / "manifest.json").string());
  m << cfg.to_json().dump(2) << "\n";
}

std::vector<FaultInfo> describe_faults() {
  return {
      {FaultKind::TpDivergence, "replicated (tensor_model_parallel=false) parameters drift on TP ranks > 0",
       {"var_state:torch.nn.Parameter.data"}, {"Consistent"}},
      {FaultKind::MissingZeroGrad, "Optimizer.zero_grad is skipped so gradients accumulate",
       {"func_entry:torch.optim.Optimizer.zero_grad", "var_state:torch.nn.Parameter.grad"},
       {"APISequence", "EventContain"}},
      {FaultKind::FrozenOptimizer, "Optimizer.step runs without updating any parameter",
       {"func_entry:torch.optim.adamw.adamw", "var_state:torch.nn.Parameter.data"}, {"EventContain"}},
      {FaultKind::DuplicateSeed, "every data-loader worker gets the same seed",
       {"func_entry:torch.utils.data.DataLoader.worker_init_fn.args.1"}, {"APIArg"}},
      {FaultKind::OutputTruncation, "the input processor returns a batch of one",
       {"func_exit:transformers.ProcessorMixin.__call__.ret"}, {"APIOutput"}},
      {FaultKind::DdpDesync, "parameters drift on DP ranks > 0", {"var_state:torch.nn.Parameter.data"},
       {"Consistent"}},
  };
}

json faults_to_json(const std::vector<FaultInfo>& faults) {
  json arr = json::array();
  for (const auto& f : faults) {
    arr.push_back({{"kind", std::string(to_string(f.kind))},
                   {"description", f.description},
                   {"affects", f.affects},
                   {"catchers", f.catchers}});
  }
  return arr;
}

}  // namespace tinv
