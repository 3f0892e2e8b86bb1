// Copyright 2026 the groundqa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundqa::pdf {

/// Text of every page in page-tree order, as UTF-8.
///
/// Objects are located by scanning for "N G obj" headers rather than trusting
/// the xref table, so files with stale offsets still load; compressed object
/// streams are expanded. Content streams may use FlateDecode, ASCIIHexDecode
/// or ASCII85Decode. Text comes from the text-showing operators (Tj, TJ, ', ")
/// with line breaks inferred from text positioning; glyph codes go through
/// the font's ToUnicode CMap when present, else its simple encoding.
///
/// Throws MalformedDocument when the bytes are not a PDF or no page tree can
/// be found.
std::vector<std::string> extract_page_texts(std::string_view bytes);

}  // namespace groundqa::pdf
