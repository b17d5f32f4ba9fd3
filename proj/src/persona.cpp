#include "empaudit/persona.hpp"

#include <fstream>
#include <set>

#include "empaudit/errors.hpp"
#include "empaudit/types.hpp"

namespace empaudit::persona {

std::string_view category_name(Category c) {
    switch (c) {
        case Category::Age: return "Age";
        case Category::Gender: return "Gender";
        case Category::Culture: return "Culture";
    }
    return "?";
}

Category category_from_name(std::string_view name) {
    if (name == "Age") return Category::Age;
    if (name == "Gender") return Category::Gender;
    if (name == "Culture") return Category::Culture;
    throw ArgumentError("unknown persona category: '" + std::string(name) + "'");
}

Taxonomy::Taxonomy(std::vector<std::string> ages, std::vector<std::string> genders,
                   std::vector<std::string> cultures)
    : ages_(std::move(ages)), genders_(std::move(genders)),
      cultures_(std::move(cultures)) {
    for (const auto* list : {&ages_, &genders_, &cultures_}) {
        if (list->empty()) throw ValidationError("taxonomy category with no values");
        std::set<std::string> seen;
        for (const auto& v : *list) {
            if (v == "Base") {
                throw ValidationError("'Base' is reserved and cannot be an attribute value");
            }
            if (!seen.insert(v).second) {
                throw ValidationError("duplicate attribute value: '" + v + "'");
            }
        }
    }
}

const Taxonomy& Taxonomy::standard() {
    static const Taxonomy t(
        {"0-17", "18-24", "25-34", "35-44", "45-54", "55+"},
        {"male", "female", "non-binary", "gender-queer"},
        {"Protestant Europe", "English Speaking", "Catholic Europe", "Confucian",
         "West and South Asia", "Latin America", "African-Islamic",
         "Orthodox Europe"});
    return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open taxonomy file: " + path.string());

    std::vector<std::string> ages, genders, cultures;
    std::vector<std::string>* current = nullptr;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            std::string section = trim(t.substr(1, t.size() - 2));
            switch (category_from_name(section)) {
                case Category::Age: current = &ages; break;
                case Category::Gender: current = &genders; break;
                case Category::Culture: current = &cultures; break;
            }
            continue;
        }
        if (!current) {
            throw ParseError("taxonomy line " + std::to_string(line_no) +
                             " outside any [Section]: '" + t + "'");
        }
        current->push_back(t);
    }
    return Taxonomy(std::move(ages), std::move(genders), std::move(cultures));
}

const std::vector<std::string>& Taxonomy::values(Category c) const {
    switch (c) {
        case Category::Age: return ages_;
        case Category::Gender: return genders_;
        case Category::Culture: return cultures_;
    }
    return ages_;
}

bool Taxonomy::contains(Category c, const std::string& value) const {
    const auto& list = values(c);
    return std::find(list.begin(), list.end(), value) != list.end();
}

const std::optional<std::string>& Persona::component(Category c) const {
    switch (c) {
        case Category::Age: return age;
        case Category::Gender: return gender;
        case Category::Culture: return culture;
    }
    return age;
}

std::optional<std::string>& Persona::component(Category c) {
    switch (c) {
        case Category::Age: return age;
        case Category::Gender: return gender;
        case Category::Culture: return culture;
    }
    return age;
}

std::string Persona::key() const {
    auto part = [](const std::optional<std::string>& v) {
        return v ? *v : std::string("Base");
    };
    return part(age) + "|" + part(gender) + "|" + part(culture);
}

Persona single_attribute_persona(const Attribute& a) {
    Persona p;
    p.component(a.category) = a.value;
    return p;
}

std::vector<Persona> build_grid(const Taxonomy& taxonomy) {
    // Per-category value sequences with Base (nullopt) last.
    auto with_base = [&](Category c) {
        std::vector<std::optional<std::string>> out;
        for (const auto& v : taxonomy.values(c)) out.emplace_back(v);
        out.emplace_back(std::nullopt);
        return out;
    };
    const auto ages = with_base(Category::Age);
    const auto genders = with_base(Category::Gender);
    const auto cultures = with_base(Category::Culture);

    std::vector<Persona> grid;
    grid.reserve(ages.size() * genders.size() * cultures.size());
    for (const auto& culture : cultures) {
        for (const auto& gender : genders) {
            for (const auto& age : ages) {
                grid.push_back(Persona{age, gender, culture});
            }
        }
    }
    return grid;
}

std::vector<Persona> isolation_set(Category category, const Taxonomy& taxonomy) {
    std::vector<Persona> out;
    for (const auto& value : taxonomy.values(category)) {
        out.push_back(single_attribute_persona(Attribute{category, value}));
    }
    return out;
}

std::vector<Persona> isolation_personas(const Taxonomy& taxonomy) {
    std::vector<Persona> out;
    for (Category c : kCategories) {
        auto set = isolation_set(c, taxonomy);
        out.insert(out.end(), set.begin(), set.end());
    }
    out.push_back(Persona{});  // base state
    return out;
}

std::optional<std::string> render(const Persona& p) {
    if (p.is_base()) return std::nullopt;

    std::vector<std::string> clauses;
    if (p.age) clauses.push_back(*p.age + " age category");
    if (p.culture) clauses.push_back(*p.culture + " culture");
    if (p.gender) clauses.push_back(*p.gender + " gender");

    std::string out = clauses.front();
    for (std::size_t i = 1; i < clauses.size(); ++i) {
        out += (i + 1 == clauses.size()) ? " and " : ", ";
        out += clauses[i];
    }
    return out;
}

}  // namespace empaudit::persona
