#include "eucgov/cli/cli.hpp"

#include <charconv>
#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/reporting/render.hpp"
#include "eucgov/risk/model.hpp"
#include "eucgov/risk/triage.hpp"
#include "eucgov/scanner/diff.hpp"
#include "eucgov/scanner/metrics.hpp"
#include "eucgov/serialization.hpp"
#include "eucgov/service/api_service.hpp"

namespace eucgov::cli {

namespace {

namespace fs = std::filesystem;
using inventory::Inventory;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string(), path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json read_json_file(const fs::path& path) { return parse_json(read_file(path), path.string()); }

std::string trim(std::string s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// ---------------------------------------------------------------------------
// Shared state for one invocation

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::string store;
  std::string format = "json";
  std::string as_of;

  fs::path store_path() const {
    if (store.empty()) throw UsageError("--store PATH (or EUC_STORE) is required for this command");
    return store;
  }
  reporting::Format fmt() const { return reporting::format_from_string(format); }
  Date as_of_date() const { return as_of.empty() ? Date::today() : Date::parse(as_of, "as-of"); }
  Inventory open() const { return Inventory(inventory::load_store(store_path())); }
  void commit(const Inventory& inv) const { inventory::save_store(store_path(), inv.document()); }

  template <typename T>
  void emit(const T& value) const {
    out << reporting::render(value, fmt());
  }
};

// ---------------------------------------------------------------------------
// Interactive questionnaire

struct Interrupted {};

struct Section {
  std::string_view title;
  std::size_t first, last;  // control_fields() index range
};

constexpr std::array<Section, 6> kSections{{
    {"a) Accessibility", 0, 2},
    {"b) Business continuity, back-up and recovery", 2, 4},
    {"c) Version control, review and testing", 4, 7},
    {"d) Security, privacy and integrity", 7, 9},
    {"e) Ability to fix", 9, 11},
    {"f) Personal data", 11, 13},
}};

constexpr std::array<std::string_view, 13> kQuestions{
    "Is the location of the application known?",
    "Are there operating instructions?",
    "Is the application backed up?",
    "Has recovery from back-up been tested?",
    "Is the application under version control?",
    "Is its review up to date?",
    "Is there evidence that it has been tested?",
    "Is access restricted to authorised users?",
    "Is it protected against unauthorised change?",
    "Could a second person fix it if it broke?",
    "Does technical documentation exist?",
    "Does it hold personal data?",
    "Does it hold sensitive personal data?",
};

class Interview {
 public:
  Interview(std::istream& in, std::ostream& prompts, json draft) : in_(in), prompts_(prompts), draft_(std::move(draft)) {
    if (!draft_.is_object()) draft_ = json::object();
    if (!draft_.contains("input") || !draft_["input"].is_object()) draft_["input"] = json::object();
    if (!draft_["input"].contains("controls") || !draft_["input"]["controls"].is_object()) {
      draft_["input"]["controls"] = json::object();
    }
  }

  const json& draft() const { return draft_; }

  risk::AssessmentInput run(std::optional<risk::ComplexityGrade> complexity_hint, Date default_date) {
    auto& input = draft_["input"];
    draft_["step"] = "general_details";
    prompts_ << "General details\n";
    auto complexity_default = stored_int(input, "complexity");
    if (!complexity_default && complexity_hint) complexity_default = risk::value(*complexity_hint);
    input["complexity"] = ask_int("Complexity (1 Low, 2 Medium, 3 High)", 1, 3, complexity_default);
    input["materiality"] = ask_int("Materiality (1 Low, 2 Medium, 3 High)", 1, 3, stored_int(input, "materiality"));
    input["impact"] = ask_int(
        "Impact (1 Inconvenient, 2 Poor customer outcomes, 3 Reputational, 4 Loss of business, 5 Financial, "
        "6 Statutory/legislative)",
        1, 6, stored_int(input, "impact"));
    auto date_default = default_date.to_string();
    if (input.contains("assessed_on") && input["assessed_on"].is_string()) {
      date_default = input["assessed_on"].get<std::string>();
    }
    input["assessed_on"] = ask_date("Assessment date (YYYY-MM-DD)", date_default).to_string();

    draft_["step"] = "controls";
    prompts_ << "Controls\n";
    auto& controls = input["controls"];
    const auto& fields = risk::control_fields();
    for (const auto& section : kSections) {
      prompts_ << section.title << "\n";
      for (std::size_t i = section.first; i < section.last; ++i) {
        std::string name(fields[i].name);
        std::optional<bool> def;
        if (controls.contains(name) && controls[name].is_boolean()) def = controls[name].get<bool>();
        controls[name] = ask_bool(kQuestions[i], def);
      }
    }
    draft_["step"] = "result";
    return input.get<risk::AssessmentInput>();
  }

 private:
  static std::optional<int> stored_int(const json& input, const char* key) {
    if (input.contains(key) && input[key].is_number_integer()) return input[key].get<int>();
    return std::nullopt;
  }

  std::string ask(std::string_view prompt, const std::string& def) {
    prompts_ << "  " << prompt;
    if (!def.empty()) prompts_ << " [" << def << "]";
    prompts_ << ": " << std::flush;
    std::string line;
    if (!std::getline(in_, line)) throw Interrupted{};
    line = trim(line);
    return line.empty() ? def : line;
  }

  int ask_int(std::string_view prompt, int lo, int hi, std::optional<int> def) {
    for (;;) {
      auto answer = ask(prompt, def ? std::to_string(*def) : "");
      int n = 0;
      auto [ptr, ec] = std::from_chars(answer.data(), answer.data() + answer.size(), n);
      if (!answer.empty() && ec == std::errc{} && ptr == answer.data() + answer.size() && n >= lo && n <= hi) return n;
      prompts_ << "    enter a whole number from " << lo << " to " << hi << "\n";
    }
  }

  bool ask_bool(std::string_view prompt, std::optional<bool> def) {
    for (;;) {
      std::string label = std::string(prompt) + " (y/n)";
      auto answer = ask(label, def ? (*def ? "y" : "n") : "");
      for (auto& c : answer) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (answer == "y" || answer == "yes") return true;
      if (answer == "n" || answer == "no") return false;
      prompts_ << "    answer y or n\n";
    }
  }

  Date ask_date(std::string_view prompt, const std::string& def) {
    for (;;) {
      if (auto d = Date::try_parse(ask(prompt, def))) return *d;
      prompts_ << "    enter a date as YYYY-MM-DD\n";
    }
  }

  std::istream& in_;
  std::ostream& prompts_;
  json draft_;
};

// ---------------------------------------------------------------------------
// Commands

struct AssessArgs {
  std::string input;
  bool interactive = false;
  std::string draft;
  std::string from_scan;
  std::vector<std::string> toggles;
  std::string id;
};

void cmd_assess(const Context& ctx, const AssessArgs& a) {
  if (a.input.empty() == !a.interactive) throw UsageError("assess needs exactly one of --input or --interactive");
  if (!a.draft.empty() && !a.interactive) throw UsageError("--draft only applies with --interactive");
  if (!a.toggles.empty() && !a.id.empty()) throw UsageError("--toggle explores a what-if and cannot be combined with --id");

  std::optional<risk::ComplexityGrade> hint;
  if (!a.from_scan.empty()) hint = scanner::scan_workbook(a.from_scan).complexity;

  std::optional<Inventory> inv;
  if (!a.draft.empty() || !a.id.empty()) inv = ctx.open();

  risk::AssessmentInput input;
  if (!a.input.empty()) {
    auto j = read_json_file(a.input);
    if (hint && j.is_object() && !j.contains("complexity")) j["complexity"] = risk::value(*hint);
    input = j.get<risk::AssessmentInput>();
  } else {
    json draft = json::object();
    if (!a.draft.empty()) {
      try {
        draft = inv->get_draft(a.draft);
        ctx.err << "Restoring previous input from draft '" << a.draft << "'\n";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UnknownDraft) throw;
      }
    }
    Interview interview(ctx.in, ctx.err, draft);
    try {
      input = interview.run(hint, ctx.as_of_date());
    } catch (const Interrupted&) {
      std::string note;
      if (!a.draft.empty()) {
        inv->put_draft(a.draft, interview.draft());
        ctx.commit(*inv);
        note = "; answers so far saved as draft '" + a.draft + "'";
      }
      throw Error(ErrorCode::MissingField, "questionnaire ended before every question was answered" + note);
    }
    if (!a.draft.empty()) inv->put_draft(a.draft, interview.draft());
  }

  if (!a.toggles.empty()) {
    if (inv) ctx.commit(*inv);
    ctx.emit(risk::what_if(input, a.toggles));
    return;
  }
  auto result = risk::assess(input);
  if (!a.id.empty()) {
    auto record = inv->record_assessment(a.id, input, result);
    ctx.commit(*inv);
    ctx.emit(record);
    return;
  }
  if (inv) ctx.commit(*inv);
  ctx.emit(result);
}

struct RecordArgs {
  std::string input, id, name, department, team, manager, sme, data_owner, app_type, file_location, description;
};

void cmd_inventory_add(const Context& ctx, const RecordArgs& a) {
  auto inv = ctx.open();
  inventory::EucaRecord record;
  if (!a.input.empty()) record = read_json_file(a.input).get<inventory::EucaRecord>();
  std::string id = !a.id.empty() ? a.id : record.id;
  if (!id.empty()) {
    auto incoming = record;
    record = inv.get(id);
    if (!a.input.empty()) {
      incoming.id = id;
      record = incoming;
    }
  }
  auto set = [](std::string& field, const std::string& value) {
    if (!value.empty()) field = value;
  };
  set(record.name, a.name);
  set(record.department, a.department);
  set(record.team, a.team);
  set(record.manager, a.manager);
  set(record.sme, a.sme);
  set(record.data_owner, a.data_owner);
  set(record.app_type, a.app_type);
  set(record.file_location, a.file_location);
  set(record.description, a.description);
  auto saved = inv.upsert_euca(record);
  ctx.commit(inv);
  ctx.emit(saved);
}

struct ListArgs {
  std::string department, band, lifecycle, due_before;
};

void cmd_inventory_list(const Context& ctx, const ListArgs& a) {
  inventory::EucaFilter filter;
  if (!a.department.empty()) filter.department = a.department;
  if (!a.band.empty()) filter.band = risk::band_from_string(a.band);
  if (!a.lifecycle.empty()) filter.lifecycle = inventory::lifecycle_from_string(a.lifecycle);
  if (!a.due_before.empty()) filter.due_before = Date::parse(a.due_before, "due-before");
  ctx.emit(ctx.open().list_eucas(filter));
}

struct RiskArgs {
  std::string input, id, risk_id, description, opened, date;
  int il = 0, is = 0, rl = 0, rs = 0;
};

void cmd_risk_link(const Context& ctx, const RiskArgs& a) {
  auto inv = ctx.open();
  inventory::RiskRegisterEntry entry;
  if (!a.input.empty()) {
    auto j = read_json_file(a.input);
    if (j.is_object() && !j.contains("opened")) j["opened"] = ctx.as_of_date().to_string();
    entry = j.get<inventory::RiskRegisterEntry>();
  } else {
    if (!a.il || !a.is || !a.rl || !a.rs) {
      throw UsageError(
          "risk link needs --input or all of --inherent-likelihood, --inherent-severity, --residual-likelihood, "
          "--residual-severity");
    }
    entry.description = a.description;
    entry.inherent_likelihood = a.il;
    entry.inherent_severity = a.is;
    entry.residual_likelihood = a.rl;
    entry.residual_severity = a.rs;
    entry.opened = a.opened.empty() ? ctx.as_of_date() : Date::parse(a.opened, "opened");
  }
  std::string euca = !a.id.empty() ? a.id : entry.euca_id;
  if (euca.empty()) throw UsageError("risk link needs --id EUCA");
  auto saved = inv.link_risk(euca, entry);
  ctx.commit(inv);
  ctx.emit(saved);
}

void cmd_serve(const Context& ctx, const service::ServeOptions& options) {
  service::ApiService api(ctx.store_path());

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto server = service::serve(api, options);
  ctx.err << "listening on http://" << options.host << ":" << server->port() << "\n" << std::flush;
  int sig = 0;
  sigwait(&signals, &sig);
  server->stop();
  server->wait();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  Context ctx{in, out, err, {}, "json", {}};
  std::function<void()> action;

  CLI::App app{"Spreadsheet and EUC application governance: scan, assess, inventory, report.", "eucgov"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--store", ctx.store, "Store file (JSON)")->envname("EUC_STORE");
  app.add_option("--format", ctx.format, "Output format: json, md or csv")
      ->check(CLI::IsMember({"json", "md", "markdown", "csv"}));
  app.add_option("--as-of", ctx.as_of, "Reporting / default date, YYYY-MM-DD");

  // scan
  std::vector<std::string> scan_files;
  auto* scan = app.add_subcommand("scan", "Extract complexity indicators from workbooks");
  scan->add_option("files", scan_files, "Workbook files (.xlsx, .xlsm)")->required()->check(CLI::ExistingFile);
  scan->callback([&] {
    action = [&] {
      std::vector<scanner::ScanReport> reports;
      for (const auto& f : scan_files) reports.push_back(scanner::scan_workbook(f));
      ctx.emit(reports);
    };
  });

  // assess
  AssessArgs assess_args;
  auto* assess = app.add_subcommand("assess", "Score an application on the risk cube");
  assess->add_option("--input", assess_args.input, "Answers file (JSON assessment input)");
  assess->add_flag("--interactive", assess_args.interactive, "Answer the questionnaire on the terminal");
  assess->add_option("--draft", assess_args.draft, "Draft key for saving / restoring questionnaire answers");
  assess->add_option("--from-scan", assess_args.from_scan, "Workbook whose scan pre-fills complexity")
      ->check(CLI::ExistingFile);
  assess->add_option("--toggle", assess_args.toggles, "Flip a control answer (what-if); repeatable");
  assess->add_option("--id", assess_args.id, "Record the result against this EUCA");
  assess->callback([&] { action = [&] { cmd_assess(ctx, assess_args); }; });

  // triage
  std::string triage_input;
  auto* triage = app.add_subcommand("triage", "Departmental quick assessment");
  triage->add_option("--input", triage_input, "Submission file (JSON)")->required();
  triage->callback([&] {
    action = [&] { ctx.emit(risk::triage(read_json_file(triage_input).get<risk::TriageSubmission>())); };
  });

  // inventory
  auto* inv = app.add_subcommand("inventory", "Maintain the EUCA inventory");
  inv->require_subcommand(1);

  RecordArgs record_args;
  auto* add = inv->add_subcommand("add", "Create a record, or update one with --id");
  add->add_option("--input", record_args.input, "Record file (JSON)");
  add->add_option("--id", record_args.id, "Existing record to update");
  add->add_option("--name", record_args.name);
  add->add_option("--department", record_args.department);
  add->add_option("--team", record_args.team);
  add->add_option("--manager", record_args.manager);
  add->add_option("--sme", record_args.sme);
  add->add_option("--data-owner", record_args.data_owner);
  add->add_option("--app-type", record_args.app_type);
  add->add_option("--file-location", record_args.file_location);
  add->add_option("--description", record_args.description);
  add->callback([&] { action = [&] { cmd_inventory_add(ctx, record_args); }; });

  ListArgs list_args;
  auto* list = inv->add_subcommand("list", "List records, ordered by department then name");
  list->add_option("--department", list_args.department);
  list->add_option("--band", list_args.band, "Blue, Green, Amber or Red");
  list->add_option("--lifecycle", list_args.lifecycle, "live or retired");
  list->add_option("--due-before", list_args.due_before, "Next review strictly before this date");
  list->callback([&] { action = [&] { cmd_inventory_list(ctx, list_args); }; });

  std::string show_id;
  auto* show = inv->add_subcommand("show", "Show one record");
  show->add_option("--id", show_id)->required();
  show->callback([&] { action = [&] { ctx.emit(ctx.open().get(show_id)); }; });

  std::string review_id, review_date;
  auto* review = inv->add_subcommand("review", "Confirm the annual review; steps next review a year on");
  review->add_option("--id", review_id)->required();
  review->add_option("--date", review_date, "Confirmation date (default --as-of or today)");
  review->callback([&] {
    action = [&] {
      auto store = ctx.open();
      Date on = review_date.empty() ? ctx.as_of_date() : Date::parse(review_date, "date");
      auto record = store.confirm_review(review_id, on);
      ctx.commit(store);
      ctx.emit(record);
    };
  });

  std::string lifecycle_id, lifecycle_reason;
  auto lifecycle_command = [&](const char* name, const char* help, inventory::Lifecycle status) {
    auto* sub = inv->add_subcommand(name, help);
    sub->add_option("--id", lifecycle_id)->required();
    sub->add_option("--reason", lifecycle_reason);
    sub->callback([&, status] {
      action = [&, status] {
        auto store = ctx.open();
        auto record = store.set_lifecycle(lifecycle_id, status, lifecycle_reason);
        ctx.commit(store);
        ctx.emit(record);
      };
    });
  };
  lifecycle_command("retire", "Mark a record retired", inventory::Lifecycle::Retired);
  lifecycle_command("revive", "Return a retired record to live (needs --reason)", inventory::Lifecycle::Live);

  std::string import_path;
  auto* import = inv->add_subcommand("import", "Upsert records from CSV (all or nothing)");
  import->add_option("file", import_path)->required()->check(CLI::ExistingFile);
  import->callback([&] {
    action = [&] {
      auto store = ctx.open();
      auto n = store.import_csv(read_file(import_path));
      ctx.commit(store);
      out << json{{"imported", n}}.dump(2) << "\n";
    };
  });

  std::string export_path;
  auto* exp = inv->add_subcommand("export", "Write the inventory as CSV");
  exp->add_option("--output,-o", export_path, "Destination file (default stdout)");
  exp->callback([&] {
    action = [&] {
      auto store = ctx.open();
      auto text = store.export_csv();
      if (export_path.empty()) {
        out << text;
        return;
      }
      std::ofstream file(export_path, std::ios::binary);
      if (!(file << text)) throw Error(ErrorCode::Io, "cannot write " + export_path, export_path);
      out << json{{"exported", store.document().records.size()}}.dump(2) << "\n";
    };
  });

  // risk
  auto* risk_cmd = app.add_subcommand("risk", "Maintain the risk register");
  risk_cmd->require_subcommand(1);
  RiskArgs risk_args;
  auto* link = risk_cmd->add_subcommand("link", "Open a register entry against an EUCA");
  link->add_option("--id", risk_args.id, "EUCA id");
  link->add_option("--input", risk_args.input, "Entry file (JSON)");
  link->add_option("--description", risk_args.description);
  link->add_option("--inherent-likelihood", risk_args.il);
  link->add_option("--inherent-severity", risk_args.is);
  link->add_option("--residual-likelihood", risk_args.rl);
  link->add_option("--residual-severity", risk_args.rs);
  link->add_option("--opened", risk_args.opened, "Opening date (default --as-of or today)");
  link->callback([&] { action = [&] { cmd_risk_link(ctx, risk_args); }; });

  auto* close = risk_cmd->add_subcommand("close", "Close a register entry");
  close->add_option("--risk-id", risk_args.risk_id)->required();
  close->add_option("--date", risk_args.date, "Closing date (default --as-of or today)");
  close->callback([&] {
    action = [&] {
      auto store = ctx.open();
      Date on = risk_args.date.empty() ? ctx.as_of_date() : Date::parse(risk_args.date, "date");
      auto entry = store.close_risk(risk_args.risk_id, on);
      ctx.commit(store);
      ctx.emit(entry);
    };
  });

  auto* risk_list = risk_cmd->add_subcommand("list", "Print the register");
  risk_list->callback([&] { action = [&] { out << json(ctx.open().document().risk_register).dump(2) << "\n"; }; });

  // kpi
  bool include_retired = false;
  std::size_t top_k = 7;
  auto* kpi = app.add_subcommand("kpi", "KPI snapshot and follow-up lists");
  kpi->require_subcommand(0, 1);
  kpi->add_flag("--include-retired", include_retired, "Count retired records too");
  kpi->callback([&] {
    if (!action) {
      action = [&] {
        ctx.emit(reporting::kpi_snapshot(ctx.open().document(), ctx.as_of_date(), {include_retired}));
      };
    }
  });
  auto* overdue = kpi->add_subcommand("overdue", "Live records whose review date has passed");
  overdue->callback([&] {
    action = [&] { ctx.emit(reporting::overdue_reviews(ctx.open().document(), ctx.as_of_date())); };
  });
  auto* unregistered = kpi->add_subcommand("unregistered", "Amber/Red records with no open register entry");
  unregistered->callback([&] {
    action = [&] { ctx.emit(reporting::unregistered_amber_red(ctx.open().document())); };
  });
  auto* concentration = kpi->add_subcommand("concentration", "Share of applications in the top departments");
  concentration->add_option("--top-k", top_k, "Number of departments")->check(CLI::PositiveNumber);
  concentration->callback([&] {
    action = [&] {
      ctx.emit(reporting::department_concentration(ctx.open().document(), top_k, {include_retired}));
    };
  });

  // diff
  std::string baseline_path, current_path;
  auto* diff = app.add_subcommand("diff", "Compare a workbook against its baseline copy");
  diff->add_option("baseline", baseline_path)->required()->check(CLI::ExistingFile);
  diff->add_option("current", current_path)->required()->check(CLI::ExistingFile);
  diff->callback([&] {
    action = [&] {
      ctx.emit(scanner::diff_against_baseline(scanner::parse_workbook(baseline_path),
                                              scanner::parse_workbook(current_path)));
    };
  });

  // serve
  service::ServeOptions serve_options;
  std::string ui_dir;
  auto* serve = app.add_subcommand("serve", "Run the local HTTP/JSON service");
  serve->add_option("--port", serve_options.port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_options.host, "Bind address");
  serve->add_option("--ui-dir", ui_dir, "Static assets for the browser UI");
  serve->callback([&] {
    action = [&] {
      if (!ui_dir.empty()) serve_options.ui_dir = ui_dir;
      cmd_serve(ctx, serve_options);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    ctx.fmt();
    action();
    out.flush();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "Internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace eucgov::cli
