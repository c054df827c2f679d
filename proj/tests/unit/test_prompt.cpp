#include <gtest/gtest.h>

#include "layoutcot/error.hpp"
#include "layoutcot/html.hpp"
#include "layoutcot/prompt.hpp"

namespace lc = layoutcot;

namespace {

lc::Layout exemplar(const std::string& id, double x) {
  lc::Layout l;
  l.id = id;
  l.canvas = {100, 200, std::nullopt};
  l.elements = {{"text", {x, 10, 50, 20}, false}, {"logo", {5, 150, 20, 20}, false}};
  return l;
}

lc::ConstraintSpec constraint_for(lc::TaskKind family) {
  const lc::Canvas canvas{100, 200, std::nullopt};
  switch (family) {
    case lc::TaskKind::ContentAware:
      return {canvas, lc::ContentAwarePayload{{{"text", 1}, {"logo", 1}}, std::nullopt, std::nullopt}};
    case lc::TaskKind::ConstraintExplicit:
      return {canvas, lc::GenTPayload{{{"text", 1}, {"logo", 1}}}};
    case lc::TaskKind::TextToLayout:
      return {canvas, lc::TextToLayoutPayload{"A flyer with a headline and a logo.", {}}};
  }
  throw std::logic_error("unreachable");
}

}  // namespace

TEST(Template, PlaceholderNamesInOrder) {
  EXPECT_EQ(lc::placeholder_names("{{A}} x {{B_2}} {{A}} {notone} {{ lower }}"),
            (std::vector<std::string>{"A", "B_2", "A"}));
}

TEST(Template, SinglePassRendering) {
  EXPECT_EQ(lc::render_template("a {{X}} b {{Y}}", {{"X", "{{Y}}"}, {"Y", "1"}}), "a {{Y}} b 1");
  try {
    lc::render_template("{{X}} {{MISSING}}", {{"X", "1"}});
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::UnboundPlaceholder);
    EXPECT_NE(std::string(e.what()).find("MISSING"), std::string::npos);
  }
}

TEST(Catalog, BuiltinMatchesTemplateDirectory) {
  const auto builtin = lc::TemplateCatalog::builtin();
  const auto disk = lc::TemplateCatalog::load(LAYOUTCOT_TEMPLATE_DIR);
  ASSERT_EQ(builtin.templates().size(), 12u);
  for (const auto& [id, t] : builtin.templates()) {
    const auto& d = disk.get(id);
    EXPECT_EQ(t.system_text, d.system_text) << lc::to_string(id);
    EXPECT_EQ(t.user_text, d.user_text) << lc::to_string(id);
  }
  EXPECT_THROW(builtin.get({lc::TaskKind::ContentAware, 7}), lc::Error);
  EXPECT_THROW(lc::TemplateCatalog::load("/nonexistent"), lc::Error);
}

// Every template renders with the bindings the builders provide.
TEST(Catalog, AllTwelveTemplatesRender) {
  const auto catalog = lc::TemplateCatalog::builtin();
  const lc::PromptContext ctx{{"text", "logo", "underlay"}, {}};
  const std::vector<lc::Layout> ex{exemplar("e1", 5), exemplar("e2", 25)};
  const auto current = exemplar("cur", 40);
  for (auto family : {lc::TaskKind::ContentAware, lc::TaskKind::ConstraintExplicit, lc::TaskKind::TextToLayout}) {
    const auto c = constraint_for(family);
    const auto coarse = lc::build_coarse_prompt(catalog, ex, c, ctx);
    EXPECT_EQ(coarse.provenance.template_id, std::string(lc::to_string(family)) + "/coarse");
    EXPECT_EQ(coarse.provenance.exemplar_ids, (std::vector<std::string>{"e1", "e2"}));
    EXPECT_NE(coarse.user.find(lc::to_html(ex[1]).text), std::string::npos);
    EXPECT_NE(coarse.user.find("Generate a layout for a 100x200 canvas"), std::string::npos);
    for (int stage = 1; stage <= 3; ++stage) {
      const auto b = lc::build_stage_prompt(catalog, stage, family, ex, current, c, ctx);
      EXPECT_EQ(b.provenance.template_id, std::string(lc::to_string(family)) + "/" + std::to_string(stage));
      EXPECT_EQ(b.provenance.constraint_digest, lc::constraint_digest(c));
      EXPECT_EQ(b.system.find("{{"), std::string::npos);
      EXPECT_EQ(b.user.find("{{"), std::string::npos);
      EXPECT_NE(b.user.find(lc::to_html(current).text), std::string::npos);
    }
  }
}

TEST(Catalog, StageTextMarkers) {
  const auto catalog = lc::TemplateCatalog::builtin();
  const lc::PromptContext ctx{{"text", "logo", "underlay"}, {}};
  const std::vector<lc::Layout> ex{exemplar("e1", 5)};
  const auto ca = lc::build_stage_prompt(catalog, 2, lc::TaskKind::ContentAware, ex, ex[0],
                                         constraint_for(lc::TaskKind::ContentAware), ctx);
  EXPECT_NE(ca.system.find("maximize IoU with associated text/logo"), std::string::npos);
  const auto tl = lc::build_stage_prompt(catalog, 2, lc::TaskKind::TextToLayout, ex, ex[0],
                                         constraint_for(lc::TaskKind::TextToLayout), ctx);
  EXPECT_NE(tl.system.find("Reduce Overlap to near zero"), std::string::npos);
  const auto t1 = lc::build_stage_prompt(catalog, 1, lc::TaskKind::TextToLayout, ex, ex[0],
                                         constraint_for(lc::TaskKind::TextToLayout), ctx);
  EXPECT_NE(t1.user.find("A flyer with a headline and a logo."), std::string::npos);
}

TEST(Prompt, Deterministic) {
  const auto catalog = lc::TemplateCatalog::builtin();
  const lc::PromptContext ctx{{"text", "title", "list", "table", "figure"}, {"title", "text"}};
  const std::vector<lc::Layout> ex{exemplar("e1", 5)};
  const auto c = constraint_for(lc::TaskKind::ConstraintExplicit);
  EXPECT_EQ(lc::build_stage_prompt(catalog, 1, lc::TaskKind::ConstraintExplicit, ex, ex[0], c, ctx),
            lc::build_stage_prompt(catalog, 1, lc::TaskKind::ConstraintExplicit, ex, ex[0], c, ctx));
}

TEST(Prompt, Errors) {
  const auto catalog = lc::TemplateCatalog::builtin();
  const auto c = constraint_for(lc::TaskKind::ContentAware);
  try {
    lc::build_coarse_prompt(catalog, {}, c, {});
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::EmptyExemplars);
  }
  EXPECT_THROW(lc::build_stage_prompt(catalog, 4, lc::TaskKind::ContentAware, {exemplar("e", 1)}, exemplar("e", 1), c, {}),
               lc::Error);
  lc::TemplateCatalog custom;
  custom.add({{lc::TaskKind::ContentAware, 0}, "sys", "needs {{NOT_BOUND}}", {"NOT_BOUND"}});
  try {
    lc::build_coarse_prompt(custom, {exemplar("e", 1)}, c, {});
    FAIL();
  } catch (const lc::Error& e) {
    EXPECT_EQ(e.code(), lc::ErrorCode::UnboundPlaceholder);
  }
}
