#pragma once

// Developer identity unification across the issue tracker and version control.
//
// Step 1, per system: people sharing a normalised login are aliases.
// Step 2, across systems: groups are merged on a shared normalised login,
// otherwise on an equal normalised full name. The name rule never merges two
// groups of the same system with each other directly.

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "traceforge/model.hpp"

namespace traceforge {

struct Person {
    std::string name;
    std::string login;  ///< nickname or e-mail; may be empty
};

namespace identity_detail {

// Latin-1 supplement and Latin Extended-A letters to their ASCII base letter.
inline std::optional<char> fold_codepoint(char32_t cp) {
    static const std::map<char32_t, char> table = [] {
        std::map<char32_t, char> t;
        auto add = [&t](std::u32string_view cps, char base) {
            for (char32_t c : cps) t[c] = base;
        };
        add(U"ÀÁÂÃÄÅàáâãäåĀāĂăĄą", 'a');
        add(U"ÇçĆćĈĉĊċČč", 'c');
        add(U"ĎďĐđ", 'd');
        add(U"ÈÉÊËèéêëĒēĔĕĖėĘęĚě", 'e');
        add(U"ĜĝĞğĠġĢģ", 'g');
        add(U"ĤĥĦħ", 'h');
        add(U"ÌÍÎÏìíîïĨĩĪīĬĭĮįİı", 'i');
        add(U"Ĵĵ", 'j');
        add(U"Ķķ", 'k');
        add(U"ĹĺĻļĽľĿŀŁł", 'l');
        add(U"ÑñŃńŅņŇň", 'n');
        add(U"ÒÓÔÕÖØòóôõöøŌōŎŏŐő", 'o');
        add(U"ŔŕŖŗŘř", 'r');
        add(U"ŚśŜŝŞşŠšß", 's');
        add(U"ŢţŤťŦŧ", 't');
        add(U"ÙÚÛÜùúûüŨũŪūŬŭŮůŰűŲų", 'u');
        add(U"Ŵŵ", 'w');
        add(U"ÝýÿŶŷŸ", 'y');
        add(U"ŹźŻżŽž", 'z');
        return t;
    }();
    auto it = table.find(cp);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace identity_detail

/// Lowercase, diacritics folded to ASCII, whitespace trimmed and collapsed.
inline std::string normalize_name(std::string_view text) {
    std::string out;
    bool pending_space = false;
    auto emit = [&](char c) {
        if (c == ' ') {
            pending_space = !out.empty();
            return;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    };
    for (std::size_t i = 0; i < text.size();) {
        const auto byte = static_cast<unsigned char>(text[i]);
        if (byte < 0x80) {
            emit(std::isspace(byte) ? ' ' : static_cast<char>(byte));
            ++i;
            continue;
        }
        // Decode one UTF-8 sequence; invalid bytes pass through unchanged.
        int len = (byte & 0xE0) == 0xC0 ? 2 : (byte & 0xF0) == 0xE0 ? 3 : (byte & 0xF8) == 0xF0 ? 4 : 1;
        if (len == 1 || i + static_cast<std::size_t>(len) > text.size()) {
            out.push_back(static_cast<char>(byte));
            ++i;
            continue;
        }
        char32_t cp = byte & (0xFF >> (len + 1));
        for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
        if (auto folded = identity_detail::fold_codepoint(cp)) {
            emit(*folded);
            if (cp == U'ß') emit('s');
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.append(text.substr(i, static_cast<std::size_t>(len)));
        }
        i += static_cast<std::size_t>(len);
    }
    return out;
}

inline std::string normalize_login(std::string_view login) {
    std::string out;
    for (unsigned char c : login) {
        if (!std::isspace(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

/// Result of unification: the identities plus a resolver from raw people to
/// their user id.
class IdentityIndex {
public:
    std::vector<DeveloperIdentity> identities;

    std::optional<UserId> resolve(PersonSource source, std::string_view name,
                                  std::string_view login) const {
        const auto nlogin = normalize_login(login);
        if (!nlogin.empty()) {
            if (auto it = by_login_.find(nlogin); it != by_login_.end()) return it->second;
        }
        const auto nname = normalize_name(name);
        if (!nname.empty()) {
            if (auto it = by_name_.find({source, nname}); it != by_name_.end()) return it->second;
        }
        return std::nullopt;
    }

private:
    friend IdentityIndex unify_identities(const std::vector<Person>&, const std::vector<Person>&);

    std::map<std::string, UserId> by_login_;
    std::map<std::pair<PersonSource, std::string>, UserId> by_name_;
};

inline IdentityIndex unify_identities(const std::vector<Person>& issue_people,
                                      const std::vector<Person>& commit_people) {
    struct Entry {
        PersonSource source;
        const Person* person;
        std::string nlogin;
        std::string nname;
    };
    std::vector<Entry> entries;
    for (const auto& p : issue_people) {
        entries.push_back({PersonSource::IssueTracker, &p, normalize_login(p.login), normalize_name(p.name)});
    }
    for (const auto& p : commit_people) {
        entries.push_back({PersonSource::VersionControl, &p, normalize_login(p.login), normalize_name(p.name)});
    }

    std::vector<std::size_t> parent(entries.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&parent](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // Steps 1 and the login half of step 2: equal login anywhere means same person.
    std::map<std::string, std::size_t> first_with_login;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].nlogin.empty()) continue;
        auto [it, inserted] = first_with_login.emplace(entries[i].nlogin, i);
        if (!inserted) unite(it->second, i);
    }

    // Step 2, name rule: a tracker group and a VCS group with an equal name.
    std::map<std::string, std::vector<std::size_t>> tracker_by_name;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].source == PersonSource::IssueTracker && !entries[i].nname.empty()) {
            tracker_by_name[entries[i].nname].push_back(i);
        }
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].source != PersonSource::VersionControl || entries[i].nname.empty()) continue;
        auto it = tracker_by_name.find(entries[i].nname);
        if (it == tracker_by_name.end()) continue;
        // Only an unambiguous tracker match merges.
        std::set<std::size_t> roots;
        for (auto j : it->second) roots.insert(find(j));
        if (roots.size() == 1) unite(*roots.begin(), i);
    }

    IdentityIndex index;
    std::map<std::size_t, std::size_t> root_to_identity;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto root = find(i);
        auto [it, inserted] = root_to_identity.emplace(root, index.identities.size());
        if (inserted) {
            DeveloperIdentity identity;
            identity.user_id = UserId{static_cast<std::uint32_t>(index.identities.size())};
            index.identities.push_back(std::move(identity));
        }
        auto& identity = index.identities[it->second];
        const auto& e = entries[i];
        if (!e.person->name.empty()) identity.names.insert(e.person->name);
        if (!e.nlogin.empty()) identity.logins.insert(e.nlogin);
        identity.sources.insert(e.source);
        if (!e.nlogin.empty()) index.by_login_[e.nlogin] = identity.user_id;
        if (!e.nname.empty()) index.by_name_.emplace(std::make_pair(e.source, e.nname), identity.user_id);
    }
    return index;
}

}  // namespace traceforge
