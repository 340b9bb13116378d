#include "actortype/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "actortype/errors.hpp"
#include "actortype/query.hpp"
#include "actortype/stix.hpp"

using nlohmann::json;

namespace actortype {

namespace {

std::shared_ptr<const Profile> resolve_profile(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        const char* env = std::getenv("ACTORTYPE_PROFILE");
        if (env && *env) path = env;
    }
    if (path.empty())
        return std::shared_ptr<const Profile>(&builtin_profile(), [](const Profile*) {});
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open profile file \"" + path + "\"");
    return std::make_shared<const Profile>(load_profile(in));
}

KnowledgeBase load_kb(const std::string& path, std::shared_ptr<const Profile> profile) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open knowledge base \"" + path + "\"");
    return load(in, std::move(profile));
}

KnowledgeBase load_or_create_kb(const std::string& path, std::shared_ptr<const Profile> profile) {
    std::ifstream in(path);
    if (!in) return KnowledgeBase(std::move(profile));
    return load(in, std::move(profile));
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write knowledge base \"" + path + "\"");
    save(kb, out);
}

std::string validity_text(const Validity& interval) {
    std::string start = interval.start ? interval.start->text() : "*";
    std::string end = interval.end ? interval.end->text() : (interval.start ? "ongoing" : "*");
    return start + " .. " + end;
}

const char* severity_text(LintSeverity severity) {
    return severity == LintSeverity::Warning ? "warning" : "info";
}

void print_lint(const std::vector<LintFinding>& findings, std::ostream& out) {
    for (const auto& finding : findings)
        out << severity_text(finding.severity) << " " << finding.code << " " << finding.subject
            << ": " << finding.message << "\n";
}

bool has_warnings(const std::vector<LintFinding>& findings) {
    for (const auto& finding : findings)
        if (finding.severity == LintSeverity::Warning) return true;
    return false;
}

void print_import_report(const ImportReport& report, std::ostream& out) {
    out << "imported " << report.actors_imported << " actor(s), " << report.activities_created
        << " activity(ies), " << report.triples_created << " triple(s), "
        << report.passthrough_objects << " passthrough object(s)\n";
    for (const auto& [type, count] : report.object_counts)
        out << "  objects of type " << type << ": " << count << "\n";
    for (const auto& u : report.unmapped)
        out << "  unmapped " << u.field << " value \"" << u.value << "\" on " << u.object_id
            << "\n";
    for (const auto& note : report.notes) out << "  note: " << note << "\n";
    print_lint(report.lint, out);
}

struct CommandContext {
    std::ostream& out;
    std::ostream& err;
    bool strict = false;
    int exit_code = 0;
};

int finish(CommandContext& ctx, bool lint_warnings) {
    if (ctx.exit_code != 0) return ctx.exit_code;
    if (ctx.strict && lint_warnings) return 1;
    return 0;
}

// --- subcommand bodies -----------------------------------------------------

int cmd_profile_validate(const std::string& file, CommandContext& ctx) {
    std::ifstream in(file);
    if (!in) {
        ctx.err << "error: cannot open profile file \"" << file << "\"\n";
        return 1;
    }
    Profile profile = load_profile(in);
    ctx.out << "profile " << profile.profile_version << ": " << profile.vocabularies.size()
            << " vocabularies, " << profile.attributes.size() << " attribute kinds, "
            << profile.types.size() << " type rules\n";
    return 0;
}

int cmd_ingest_stix(const std::string& file, const std::string& kb_path,
                    const std::string& mapping_path, CommandContext& ctx) {
    auto profile = resolve_profile("");
    KnowledgeBase kb = load_or_create_kb(kb_path, profile);
    StixMapping mapping;
    if (mapping_path.empty()) {
        mapping = builtin_mapping();
    } else {
        std::ifstream min(mapping_path);
        if (!min) throw ValidationError("cannot open mapping file \"" + mapping_path + "\"");
        mapping = load_mapping(min, *profile);
    }
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open bundle \"" + file + "\"");
    ImportReport report = import_stix_bundle(in, mapping, kb);
    save_kb(kb, kb_path);
    print_import_report(report, ctx.out);
    for (const auto& e : report.errors) ctx.err << "error: " << e << "\n";
    if (!report.errors.empty()) ctx.exit_code = 1;
    return finish(ctx, has_warnings(report.lint));
}

int cmd_ingest_misp(const std::string& file, const std::string& kb_path, CommandContext& ctx) {
    auto profile = resolve_profile("");
    KnowledgeBase kb = load_or_create_kb(kb_path, profile);
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open cluster \"" + file + "\"");
    ImportReport report = import_misp_cluster(in, kb);
    save_kb(kb, kb_path);
    print_import_report(report, ctx.out);
    for (const auto& e : report.errors) ctx.err << "error: " << e << "\n";
    if (!report.errors.empty()) ctx.exit_code = 1;
    return finish(ctx, has_warnings(report.lint));
}

int cmd_classify(const std::string& kb_path, const std::string& actor, const std::string& profile_path,
                 const std::string& out_path, std::size_t near_miss, bool json_mode,
                 CommandContext& ctx) {
    auto profile = resolve_profile(profile_path);
    KnowledgeBase kb = load_kb(kb_path, profile);
    if (kb.stored_profile_version() != profile->profile_version)
        ctx.err << "warning: store was written with profile \"" << kb.stored_profile_version()
                << "\", classifying with \"" << profile->profile_version << "\"\n";
    if (!actor.empty() && !kb.find_actor(actor))
        throw ValidationError("unknown actor \"" + actor + "\"");

    std::string report = classify_report_json(kb, *profile, actor, near_miss);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot write report \"" + out_path + "\"");
        out << report;
        return 0;
    }
    if (json_mode) {
        ctx.out << report;
        return 0;
    }

    for (const auto& [actor_id, stored] : kb.actors()) {
        if (!actor.empty() && actor_id != actor) continue;
        ctx.out << "actor " << actor_id << " (" << stored.canonical_name << ")\n";
        TypeTimeline timeline = classify_actor(actor_id, kb, *profile);
        if (timeline.entries.empty()) ctx.out << "  no classifications\n";
        for (const auto& entry : timeline.entries) {
            ctx.out << "  " << validity_text(entry.interval) << "  " << entry.type_id << "  ["
                    << (entry.origin == InferenceOrigin::Inferred ? "inferred from " + entry.subject
                                                                  : "asserted")
                    << "]\n";
        }
        for (const Activity* activity : kb.activities_of(actor_id)) {
            auto classification = classify_activity(*activity, *profile, near_miss);
            for (const auto& miss : classification.near_misses) {
                ctx.out << "  near miss: " << activity->id << " ~ " << miss.type_id << " ("
                        << miss.satisfied_count << "/" << miss.total_count << " conjuncts)\n";
                for (const auto& fc : miss.failing_conjuncts) {
                    ctx.out << "    failing: " << fc.expression;
                    if (!fc.observed.empty()) {
                        ctx.out << "  observed: ";
                        for (std::size_t i = 0; i < fc.observed.size(); ++i)
                            ctx.out << (i ? ", " : "") << fc.observed[i];
                    }
                    ctx.out << "\n";
                }
            }
        }
    }
    return 0;
}

int cmd_explain(const std::string& kb_path, const std::string& activity_id,
                const std::string& type_id, const std::string& profile_path, CommandContext& ctx) {
    auto profile = resolve_profile(profile_path);
    KnowledgeBase kb = load_kb(kb_path, profile);
    const Activity* activity = kb.find_activity(activity_id);
    if (!activity) throw ValidationError("unknown activity \"" + activity_id + "\"");
    const TypeRule* rule = profile->find_type(type_id);
    if (!rule)
        throw ValidationError("type \"" + type_id + "\" is not defined by profile \"" +
                              profile->profile_version + "\"");

    SatisfactionTrace trace = evaluate(rule->expression, activity->attrs, *profile);
    ctx.out << "rule " << type_id << " on activity " << activity_id << ": "
            << (trace.satisfied ? "SATISFIED" : "NOT SATISFIED") << "\n";
    if (!trace.satisfied && rule->expression.op == ClassExpression::Op::And) {
        auto classification = classify_activity(*activity, *profile,
                                                rule->expression.children.size());
        for (const auto& miss : classification.near_misses) {
            if (miss.type_id != type_id) continue;
            ctx.out << "near miss: " << miss.satisfied_count << "/" << miss.total_count
                    << " conjuncts satisfied\n";
            for (const auto& fc : miss.failing_conjuncts) {
                ctx.out << "  failing: " << fc.expression << "\n";
                if (!fc.observed.empty()) {
                    ctx.out << "  observed: ";
                    for (std::size_t i = 0; i < fc.observed.size(); ++i)
                        ctx.out << (i ? ", " : "") << fc.observed[i];
                    ctx.out << "\n";
                }
            }
        }
    }
    ctx.out << render_trace(trace);
    return 0;
}

int cmd_query(const std::string& kb_path, const std::string& query_text, bool json_mode,
              CommandContext& ctx) {
    auto profile = resolve_profile("");
    KnowledgeBase kb = load_kb(kb_path, profile);
    Query query = parse_query(query_text);
    auto timelines = build_timelines(kb, *profile);
    auto rows = run_query(query, kb, timelines);
    if (json_mode) {
        for (const auto& row : rows) {
            json j;
            j["id"] = row.id;
            for (const auto& [key, value] : row.fields) j[key] = value;
            ctx.out << j.dump() << "\n";
        }
    } else {
        for (const auto& row : rows) {
            ctx.out << row.id;
            for (const auto& [key, value] : row.fields) ctx.out << "\t" << value;
            ctx.out << "\n";
        }
        ctx.err << rows.size() << " result(s)\n";
    }
    return 0;
}

int cmd_export_stix(const std::string& kb_path, std::vector<std::string> actors,
                    const std::string& out_path, CommandContext& ctx) {
    auto profile = resolve_profile("");
    KnowledgeBase kb = load_kb(kb_path, profile);

    std::sort(actors.begin(), actors.end());
    actors.erase(std::unique(actors.begin(), actors.end()), actors.end());
    std::vector<TypeInference> inferences;
    for (const auto& actor_id : actors) {
        if (!kb.find_actor(actor_id)) throw ValidationError("unknown actor \"" + actor_id + "\"");
        TypeTimeline timeline = classify_actor(actor_id, kb, *profile);
        inferences.insert(inferences.end(), timeline.entries.begin(), timeline.entries.end());
    }
    std::string bundle = export_stix_bundle(kb, inferences, actors);
    if (out_path.empty()) {
        ctx.out << bundle;
    } else {
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot write bundle \"" + out_path + "\"");
        out << bundle;
    }
    return 0;
}

int cmd_lint(const std::string& kb_path, CommandContext& ctx) {
    auto profile = resolve_profile("");
    KnowledgeBase kb = load_kb(kb_path, profile);
    auto findings = lint(kb, *profile);
    print_lint(findings, ctx.out);
    ctx.out << findings.size() << " finding(s)\n";
    return finish(ctx, has_warnings(findings));
}

} // namespace

std::map<std::string, TypeTimeline> build_timelines(const KnowledgeBase& kb,
                                                    const Profile& profile) {
    std::map<std::string, TypeTimeline> timelines;
    for (const auto& [actor_id, actor] : kb.actors())
        timelines[actor_id] = classify_actor(actor_id, kb, profile);
    return timelines;
}

std::string classify_report_json(const KnowledgeBase& kb, const Profile& profile,
                                 const std::string& actor_filter,
                                 std::size_t near_miss_threshold) {
    json results = json::array();
    for (const auto& [actor_id, actor] : kb.actors()) {
        if (!actor_filter.empty() && actor_id != actor_filter) continue;
        json entry;
        entry["actor"] = actor_id;
        entry["name"] = actor.canonical_name;
        TypeTimeline timeline = classify_actor(actor_id, kb, profile);
        json inferences = json::array();
        for (const auto& inference : timeline.entries)
            inferences.push_back(inference_to_json(inference));
        entry["inferences"] = std::move(inferences);
        json misses = json::array();
        for (const Activity* activity : kb.activities_of(actor_id)) {
            auto classification = classify_activity(*activity, profile, near_miss_threshold);
            for (const auto& miss : classification.near_misses) {
                json jm = near_miss_to_json(miss);
                jm["activity"] = activity->id;
                misses.push_back(std::move(jm));
            }
        }
        entry["near_misses"] = std::move(misses);
        results.push_back(std::move(entry));
    }
    json report;
    report["profile_version"] = profile.profile_version;
    report["results"] = std::move(results);
    return report.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Threat actor characterization and type inference"};
    app.name("actortype");
    CommandContext ctx{out, err, false, 0};
    app.add_flag("--strict", ctx.strict, "treat lint warnings as errors");
    app.require_subcommand(1);

    int result = 0;
    auto guard = [&](auto&& body) {
        return [&, body]() {
            try {
                result = body();
            } catch (const Error& e) {
                err << "error: " << e.what() << "\n";
                result = 1;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << "\n";
                result = 1;
            }
        };
    };

    // profile validate <file>
    auto* profile_cmd = app.add_subcommand("profile", "profile tools");
    profile_cmd->require_subcommand(1);
    auto* validate_cmd = profile_cmd->add_subcommand("validate", "validate a profile file");
    std::string validate_file;
    validate_cmd->add_option("file", validate_file, "profile JSON file")->required();
    validate_cmd->callback(guard([&]() { return cmd_profile_validate(validate_file, ctx); }));

    // ingest stix|misp <file> --kb <path> [--mapping <file>]
    auto* ingest_cmd = app.add_subcommand("ingest", "import external records");
    ingest_cmd->require_subcommand(1);
    std::string ingest_file, ingest_kb, ingest_mapping;
    auto* stix_cmd = ingest_cmd->add_subcommand("stix", "import a STIX 2.1 bundle");
    stix_cmd->add_option("file", ingest_file, "bundle JSON file")->required();
    stix_cmd->add_option("--kb", ingest_kb, "knowledge base path")->required();
    stix_cmd->add_option("--mapping", ingest_mapping, "mapping table file");
    stix_cmd->callback(guard([&]() { return cmd_ingest_stix(ingest_file, ingest_kb, ingest_mapping, ctx); }));
    auto* misp_cmd = ingest_cmd->add_subcommand("misp", "import a MISP galaxy cluster");
    misp_cmd->add_option("file", ingest_file, "cluster JSON file")->required();
    misp_cmd->add_option("--kb", ingest_kb, "knowledge base path")->required();
    misp_cmd->callback(guard([&]() { return cmd_ingest_misp(ingest_file, ingest_kb, ctx); }));

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify actors and activities");
    std::string classify_kb, classify_actor_id, classify_profile, classify_out;
    std::size_t classify_near_miss = 1;
    bool classify_json = false;
    classify_cmd->add_option("--kb", classify_kb, "knowledge base path")->required();
    classify_cmd->add_option("--actor", classify_actor_id, "classify a single actor");
    classify_cmd->add_option("--profile", classify_profile, "profile file overriding the default");
    classify_cmd->add_option("--out", classify_out, "write the JSON report to a file");
    classify_cmd->add_option("--near-miss", classify_near_miss,
                             "max failing conjuncts for a near miss (default 1)");
    classify_cmd->add_flag("--json", classify_json, "print the JSON report");
    classify_cmd->callback(guard([&]() {
        return cmd_classify(classify_kb, classify_actor_id, classify_profile, classify_out,
                            classify_near_miss, classify_json, ctx);
    }));

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "show the trace of one rule on one activity");
    std::string explain_kb, explain_activity, explain_type, explain_profile;
    explain_cmd->add_option("--kb", explain_kb, "knowledge base path")->required();
    explain_cmd->add_option("--activity", explain_activity, "activity id")->required();
    explain_cmd->add_option("--type", explain_type, "type rule id")->required();
    explain_cmd->add_option("--profile", explain_profile, "profile file overriding the default");
    explain_cmd->callback(guard([&]() {
        return cmd_explain(explain_kb, explain_activity, explain_type, explain_profile, ctx);
    }));

    // query
    auto* query_cmd = app.add_subcommand("query", "filter actors or activities");
    std::string query_kb, query_text;
    bool query_json = false;
    query_cmd->add_option("--kb", query_kb, "knowledge base path")->required();
    query_cmd->add_option("query", query_text, "query text")->required();
    query_cmd->add_flag("--json", query_json, "JSON lines output");
    query_cmd->callback(guard([&]() { return cmd_query(query_kb, query_text, query_json, ctx); }));

    // export stix
    auto* export_cmd = app.add_subcommand("export", "export enriched records");
    export_cmd->require_subcommand(1);
    std::string export_kb, export_out;
    std::vector<std::string> export_actors;
    auto* export_stix_cmd = export_cmd->add_subcommand("stix", "export a STIX 2.1 bundle");
    export_stix_cmd->add_option("--kb", export_kb, "knowledge base path")->required();
    export_stix_cmd->add_option("--actors", export_actors, "actor ids")
        ->required()
        ->delimiter(',');
    export_stix_cmd->add_option("--out", export_out, "output file (stdout when omitted)");
    export_stix_cmd->callback(
        guard([&]() { return cmd_export_stix(export_kb, export_actors, export_out, ctx); }));

    // lint
    auto* lint_cmd = app.add_subcommand("lint", "report characterization inconsistencies");
    std::string lint_kb;
    lint_cmd->add_option("--kb", lint_kb, "knowledge base path")->required();
    lint_cmd->callback(guard([&]() { return cmd_lint(lint_kb, ctx); }));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend()); // CLI11 convention
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    return result;
}

} // namespace actortype
