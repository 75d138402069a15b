#include "dialect_audit/cli.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <pthread.h>
#include <thread>

#include "dialect_audit/annotate.hpp"
#include "dialect_audit/audit.hpp"
#include "dialect_audit/corpus.hpp"
#include "dialect_audit/error.hpp"
#include "dialect_audit/http.hpp"
#include "dialect_audit/metrics.hpp"
#include "dialect_audit/report.hpp"
#include "dialect_audit/textnorm.hpp"
#include "dialect_audit/tsv.hpp"
#include "dialect_audit/utf8.hpp"

namespace dialect_audit::cli {
namespace {

using report::Json;
using report::RunManifest;

struct Globals {
  bool quiet = false;
  std::optional<std::uint64_t> seed;
};

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    file << content;
    if (!file.flush()) throw Error(ErrorKind::io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

corpus::LabelInventory inventory_from(const std::string& path) {
  return path.empty() ? corpus::LabelInventory::defaults() : corpus::LabelInventory::load(path);
}

std::vector<char32_t> parse_keep(const std::string& keep) {
  const std::u32string decoded = utf8::decode(keep);
  return {decoded.begin(), decoded.end()};
}

void add_inventory_input(RunManifest& manifest, const std::string& labels) {
  manifest.config.emplace_back("labels", labels.empty() ? Json("builtin") : Json(labels));
  if (!labels.empty()) manifest.add_input(labels);
}

// Blocks SIGINT/SIGTERM and stops the server when one arrives.
class SignalStopper {
 public:
  explicit SignalStopper(annotate::HttpServer& server) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
    waiter_ = std::thread([this, &server] {
      int sig = 0;
      sigwait(&set_, &sig);
      server.stop();
    });
  }
  ~SignalStopper() {
    pthread_kill(waiter_.native_handle(), SIGUSR1);
    waiter_.join();
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t set_{};
  sigset_t old_{};
  std::thread waiter_;
};

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audit Arabic dialect-identification datasets for sentences valid in several dialects.",
               "dialect-audit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_flag("--quiet", globals.quiet, "Suppress progress messages");
  app.add_option("--seed", globals.seed, "Seed for randomized subcommands");
  app.set_version_flag("--version", std::string("dialect-audit ") + DIALECT_AUDIT_VERSION);

  // normalize
  std::string norm_input, norm_column, norm_output = "-", norm_keep;
  bool norm_fold = false;
  auto* normalize = app.add_subcommand("normalize", "Normalize one column of a TSV file");
  normalize->add_option("--input", norm_input)->required();
  normalize->add_option("--column", norm_column)->required();
  normalize->add_option("--output", norm_output);
  normalize->add_flag("--fold", norm_fold, "Also fold alef/hamza and alef maqsura variants");
  normalize->add_option("--keep", norm_keep, "Extra characters to keep");

  // transform
  std::string tr_format, tr_map, tr_input, tr_output = "-", tr_labels;
  bool tr_drop_msa = false;
  auto* transform = app.add_subcommand("transform", "Turn a parallel corpus into labeled samples");
  transform->add_option("--format", tr_format, "madar, padic, mpca or generic-tsv")->required();
  transform->add_option("--city-map", tr_map)->required();
  transform->add_option("--input", tr_input)->required();
  transform->add_option("--output", tr_output);
  transform->add_option("--labels", tr_labels, "Label inventory TSV (code, level)");
  transform->add_flag("--drop-msa", tr_drop_msa);

  // audit
  std::string au_input, au_report = "-", au_weighting = "samples", au_labels;
  std::size_t au_top_k = 20;
  bool au_drop_msa = false;
  auto* audit_cmd = app.add_subcommand("audit", "Estimate multi-validity and the maximal accuracy");
  audit_cmd->add_option("--input", au_input)->required();
  audit_cmd->add_option("--report", au_report);
  audit_cmd->add_option("--weighting", au_weighting)->check(CLI::IsMember({"samples", "sentences"}));
  audit_cmd->add_option("--top-k", au_top_k);
  audit_cmd->add_option("--labels", au_labels);
  audit_cmd->add_flag("--drop-msa", au_drop_msa);

  // simulate
  std::string sim_input, sim_report = "-", sim_labels;
  std::uint64_t sim_trials = 1'000'000;
  unsigned sim_threads = 0;
  bool sim_drop_msa = false;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo check of the maximal accuracy");
  simulate->add_option("--input", sim_input)->required();
  simulate->add_option("--trials", sim_trials)->check(CLI::PositiveNumber);
  simulate->add_option("--threads", sim_threads);
  simulate->add_option("--report", sim_report);
  simulate->add_option("--labels", sim_labels);
  simulate->add_flag("--drop-msa", sim_drop_msa);

  // evaluate
  std::string ev_gold, ev_pred, ev_report = "-", ev_confusion, ev_fps, ev_labels;
  auto* evaluate = app.add_subcommand("evaluate", "Classification report and confusion matrix");
  evaluate->add_option("--gold", ev_gold)->required();
  evaluate->add_option("--pred", ev_pred)->required();
  evaluate->add_option("--report", ev_report);
  evaluate->add_option("--confusion", ev_confusion, "Write the confusion matrix as CSV");
  evaluate->add_option("--fps", ev_fps, "Write false positives as annotation tasks");
  evaluate->add_option("--labels", ev_labels);

  // correct
  std::string co_eval, co_judgments, co_report = "-";
  auto* correct = app.add_subcommand("correct", "Metrics corrected by annotator judgments");
  correct->add_option("--eval", co_eval)->required();
  correct->add_option("--judgments", co_judgments)->required();
  correct->add_option("--report", co_report);

  // kappa
  std::string ka_a, ka_b;
  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotators");
  kappa->add_option("--a", ka_a, "TSV with id and label columns")->required();
  kappa->add_option("--b", ka_b)->required();

  // serve
  std::string sv_tasks, sv_store, sv_annotators, sv_host = "127.0.0.1", sv_pages, sv_static, sv_admin;
  int sv_port = 8080;
  double sv_lease_minutes = 15.0;
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--tasks", sv_tasks, "Task TSV; optional once the store has a snapshot");
  serve->add_option("--store", sv_store)->required();
  serve->add_option("--annotators", sv_annotators)->required();
  serve->add_option("--port", sv_port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", sv_host);
  serve->add_option("--lease-minutes", sv_lease_minutes)->check(CLI::PositiveNumber);
  serve->add_option("--pages", sv_pages, "Directory with instructions.md and example-N.md");
  serve->add_option("--static", sv_static, "Directory served at /");
  serve->add_option("--admin-token", sv_admin, "Token required by /api/export");

  // export-judgments
  std::string ex_store, ex_output = "-";
  auto* export_cmd = app.add_subcommand("export-judgments", "Write stored judgments as JSON lines");
  export_cmd->add_option("--store", ex_store)->required();
  export_cmd->add_option("--output", ex_output);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    Json error;
    error["error"] = "usage";
    error["message"] = e.what();
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--seed") {
        ++i;
      } else if (!args[i].starts_with("-")) {
        if (app.get_subcommand_no_throw(args[i]) == nullptr) {
          error["message"] = "unknown subcommand '" + args[i] + "'";
        }
        break;
      }
    }
    err << error.dump() << '\n';
    return 2;
  }

  const auto note = [&](const std::string& message) {
    if (!globals.quiet) err << message << '\n';
  };

  try {
    if (normalize->parsed()) {
      tsv::Table table = tsv::read_file(norm_input);
      const std::size_t col = table.require_column(norm_column, norm_input);
      textnorm::NormalizeOptions opts{norm_fold, parse_keep(norm_keep)};
      std::size_t empty = 0;
      for (auto& row : table.rows) {
        auto normalized = textnorm::normalize(row[col], opts);
        if (!normalized) ++empty;
        row[col] = normalized.value_or("");
      }
      std::ostringstream buf;
      tsv::write(buf, table);
      write_output(norm_output, buf.str(), out);
      note("normalized " + std::to_string(table.rows.size()) + " rows, " + std::to_string(empty) +
           " left empty");
      return 0;
    }

    if (transform->parsed()) {
      const corpus::LabelInventory inventory = inventory_from(tr_labels);
      const corpus::CityCountryMap map = corpus::CityCountryMap::load(tr_map);
      const corpus::ParallelCorpus parallel = corpus::ingest_parallel(tr_input, corpus::parse_format(tr_format));
      for (const auto& w : parallel.warnings) note(tr_input + ":" + std::to_string(w.line) + ": " + w.message);
      const corpus::LabeledDataset ds =
          corpus::parallel_to_di(parallel.rows, map, inventory, {tr_drop_msa, {}});
      std::ostringstream buf;
      corpus::write_dataset(buf, ds);
      write_output(tr_output, buf.str(), out);
      note("wrote " + std::to_string(ds.samples.size()) + " samples from " +
           std::to_string(ds.counters.input_cells) + " cells (" +
           std::to_string(ds.counters.dropped_empty) + " empty, " +
           std::to_string(ds.counters.dropped_duplicate) + " duplicate, " +
           std::to_string(ds.counters.dropped_msa) + " MSA dropped)");
      return 0;
    }

    if (audit_cmd->parsed()) {
      RunManifest manifest("audit");
      manifest.config.emplace_back("weighting", au_weighting);
      manifest.config.emplace_back("top_k", au_top_k);
      manifest.config.emplace_back("drop_msa", au_drop_msa);
      add_inventory_input(manifest, au_labels);
      manifest.add_input(au_input);
      corpus::IngestOptions opts;
      opts.drop_msa = au_drop_msa;
      const corpus::LabeledDataset ds = corpus::ingest_labeled(au_input, inventory_from(au_labels), opts);
      const audit::AuditReport rep = audit::run_audit(ds, audit::parse_weighting(au_weighting), au_top_k);
      for (const auto& w : rep.warnings) note("warning: " + w);
      const std::size_t groups = audit::group_validity(ds).size();
      write_output(au_report, dump(report::audit_json(rep, ds.counters, groups, manifest)), out);
      return 0;
    }

    if (simulate->parsed()) {
      RunManifest manifest("simulate");
      const std::uint64_t seed = globals.seed.value_or(0);
      manifest.seed = seed;
      manifest.config.emplace_back("trials", sim_trials);
      manifest.config.emplace_back("drop_msa", sim_drop_msa);
      add_inventory_input(manifest, sim_labels);
      manifest.add_input(sim_input);
      corpus::IngestOptions opts;
      opts.drop_msa = sim_drop_msa;
      const corpus::LabeledDataset ds = corpus::ingest_labeled(sim_input, inventory_from(sim_labels), opts);
      const auto groups = audit::group_validity(ds);
      const double analytic = audit::expected_max_accuracy(audit::perc_distribution(groups, ds));
      const double simulated = audit::simulate_oracle(ds, groups, sim_trials, seed, sim_threads);
      Json result;
      result["manifest"] = manifest.to_json();
      result["trials"] = sim_trials;
      result["simulated_accuracy"] = simulated;
      result["expected_max_accuracy"] = analytic;
      result["difference"] = simulated - analytic;
      write_output(sim_report, dump(result), out);
      return 0;
    }

    if (evaluate->parsed()) {
      RunManifest manifest("evaluate");
      add_inventory_input(manifest, ev_labels);
      manifest.add_input(ev_gold);
      manifest.add_input(ev_pred);
      const corpus::LabelInventory inventory = inventory_from(ev_labels);
      corpus::IngestOptions opts;
      opts.collapse_duplicates = false;
      opts.keep_empty = true;
      const corpus::LabeledDataset gold = corpus::ingest_labeled(ev_gold, inventory, opts);
      const std::vector<std::string> pred = corpus::load_predictions(ev_pred, gold, inventory);

      std::vector<std::string> gold_labels;
      std::set<std::string> used(pred.begin(), pred.end());
      std::vector<metrics::SampleOutcome> samples;
      for (std::size_t i = 0; i < gold.samples.size(); ++i) {
        gold_labels.push_back(gold.samples[i].label.code);
        used.insert(gold.samples[i].label.code);
        samples.push_back({gold.samples[i].id, gold.samples[i].label.code, pred[i]});
      }
      std::vector<std::string> labels;
      for (const auto& l : inventory.labels()) {
        if (used.contains(l.code)) labels.push_back(l.code);
      }
      const metrics::ConfusionMatrix cm = metrics::confusion(gold_labels, pred, labels);
      const metrics::ClassificationReport rep = metrics::classification_report(cm);
      const metrics::Outcomes outcomes(std::move(samples));
      write_output(ev_report, dump(report::eval_json(cm, rep, outcomes, manifest)), out);
      if (!ev_confusion.empty()) write_output(ev_confusion, report::confusion_csv(cm), out);
      if (!ev_fps.empty()) {
        const auto tasks = annotate::import_fps(gold, pred);
        std::ostringstream buf;
        annotate::write_tasks(buf, tasks);
        write_output(ev_fps, buf.str(), out);
        note("wrote " + std::to_string(tasks.size()) + " annotation tasks");
      }
      return 0;
    }

    if (correct->parsed()) {
      RunManifest manifest("correct");
      manifest.add_input(co_eval);
      manifest.add_input(co_judgments);
      const report::EvalInput eval = report::read_eval(co_eval);
      std::ifstream in(co_judgments, std::ios::binary);
      if (!in) throw Error(ErrorKind::io, "cannot open " + co_judgments);
      const annotate::JudgmentSet judgments = annotate::read_jsonl(in, co_judgments);
      write_output(co_report, dump(report::corrected_json(eval, judgments, manifest)), out);
      return 0;
    }

    if (kappa->parsed()) {
      RunManifest manifest("kappa");
      manifest.add_input(ka_a);
      manifest.add_input(ka_b);
      const auto read_labels = [](const std::string& path) {
        const tsv::Table t = tsv::read_file(path);
        const std::size_t id = t.require_column("id", path);
        const std::size_t label = t.require_column("label", path);
        std::map<std::string, std::string> out;
        for (const auto& row : t.rows) {
          if (!out.emplace(row[id], row[label]).second) {
            throw Error(ErrorKind::alignment, path + ": duplicate id '" + row[id] + "'");
          }
        }
        return out;
      };
      const auto a = read_labels(ka_a);
      const auto b = read_labels(ka_b);
      std::vector<std::string> la, lb;
      for (const auto& [id, label] : a) {
        const auto it = b.find(id);
        if (it == b.end()) throw Error(ErrorKind::alignment, "id '" + id + "' missing from " + ka_b);
        la.push_back(label);
        lb.push_back(it->second);
      }
      if (a.size() != b.size()) throw Error(ErrorKind::alignment, ka_b + " has ids missing from " + ka_a);
      Json result;
      result["manifest"] = manifest.to_json();
      result["items"] = la.size();
      result["kappa"] = metrics::cohen_kappa(la, lb);
      out << dump(result);
      return 0;
    }

    if (serve->parsed()) {
      std::vector<annotate::AnnotationTask> tasks;
      if (!sv_tasks.empty()) tasks = annotate::read_tasks(sv_tasks);
      annotate::ServiceOptions service_opts;
      service_opts.lease = std::chrono::milliseconds(static_cast<long long>(sv_lease_minutes * 60'000));
      annotate::AnnotationService service(sv_store, std::move(tasks), annotate::read_annotators(sv_annotators),
                                          service_opts);
      annotate::HttpOptions http_opts;
      if (!sv_pages.empty()) http_opts.pages = annotate::InstructionPages::load(sv_pages);
      if (!sv_static.empty()) http_opts.static_dir = sv_static;
      if (!sv_admin.empty()) http_opts.admin_token = sv_admin;
      annotate::HttpServer server(service, http_opts);
      const int port = server.bind(sv_host, sv_port);
      note("serving " + std::to_string(service.tasks().size()) + " tasks on http://" + sv_host + ":" +
           std::to_string(port));
      {
        SignalStopper stopper(server);
        server.run();
      }
      return 0;
    }

    if (export_cmd->parsed()) {
      const annotate::JudgmentSet judgments = annotate::AnnotationService::replay_judgments(ex_store);
      std::ostringstream buf;
      annotate::write_jsonl(buf, judgments);
      write_output(ex_output, buf.str(), out);
      return 0;
    }
  } catch (const Error& e) {
    Json error;
    error["error"] = to_string(e.kind());
    error["message"] = e.what();
    err << error.dump() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    Json error;
    error["error"] = to_string(ErrorKind::io);
    error["message"] = e.what();
    err << error.dump() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dialect_audit::cli
